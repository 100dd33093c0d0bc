#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x > 0.0) deliberately rejects NaN

pub mod grid;
pub mod codec;
pub mod sim;
pub mod attack;
pub mod ml;
pub mod scada;
pub mod harness;
