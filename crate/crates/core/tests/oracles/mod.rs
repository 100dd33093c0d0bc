//! Independent reference implementations shared by the oracle tests and
//! the acceptance run.
#![allow(dead_code)]

pub mod fault;
pub mod frames;
pub mod ml;
