//! Plain-text case files.
//!
//! ```text
//! base_mva 100
//! nominal_hz 60
//! [buses]       id type base_kv gs_mw bs_mvar        (type: slack | pv | pq)
//! [generators]  bus p_mw v_setpoint_pu x1_pu x0_pu
//! [loads]       bus p_mw q_mvar
//! [branches]    from to r x b tap r0 x0 b0           (tap 0 = nominal)
//! ```
//!
//! Values are per-unit on `base_mva` except the MW/MVAr columns. `#` starts a
//! comment. Branch ids are assigned 1.. in file order.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::network::{Branch, Bus, BusKind, Generator, Load, NetworkModel, SequenceBranch};
use super::GridError;

const IEEE14: &str = include_str!("../../data/ieee14.case");

/// The embedded IEEE 14-bus case.
pub fn build_ieee14() -> NetworkModel {
    parse_case(IEEE14).expect("embedded IEEE 14-bus case is well formed")
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Buses,
    Generators,
    Loads,
    Branches,
}

pub fn parse_case(text: &str) -> Result<NetworkModel, GridError> {
    let mut base_mva = 100.0;
    let mut nominal_hz = 60.0;
    let mut buses = Vec::new();
    let mut generators = Vec::new();
    let mut load_rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut branches = Vec::new();
    let mut section = Section::Header;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| GridError::CaseParse {
            line: lineno + 1,
            message: msg,
        };
        if line.starts_with('[') {
            section = match line {
                "[buses]" => Section::Buses,
                "[generators]" => Section::Generators,
                "[loads]" => Section::Loads,
                "[branches]" => Section::Branches,
                other => return Err(err(format!("unknown section {other}"))),
            };
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |i: usize| -> Result<f64, GridError> {
            fields
                .get(i)
                .ok_or_else(|| err(format!("missing column {}", i + 1)))?
                .parse::<f64>()
                .map_err(|e| err(format!("column {}: {e}", i + 1)))
        };
        let int = |i: usize| -> Result<usize, GridError> {
            fields
                .get(i)
                .ok_or_else(|| err(format!("missing column {}", i + 1)))?
                .parse::<usize>()
                .map_err(|e| err(format!("column {}: {e}", i + 1)))
        };
        match section {
            Section::Header => match fields.as_slice() {
                ["base_mva", v] => base_mva = v.parse().map_err(|e| err(format!("base_mva: {e}")))?,
                ["nominal_hz", v] => nominal_hz = v.parse().map_err(|e| err(format!("nominal_hz: {e}")))?,
                _ => return Err(err(format!("unexpected header line '{line}'"))),
            },
            Section::Buses => {
                let kind = match fields.get(1).copied() {
                    Some("slack") => BusKind::Slack,
                    Some("pv") => BusKind::Pv,
                    Some("pq") => BusKind::Pq,
                    other => return Err(err(format!("bad bus type {other:?}"))),
                };
                buses.push(Bus {
                    id: int(0)?,
                    kind,
                    base_kv: num(2)?,
                    shunt: Complex64::new(num(3)?, num(4)?) / base_mva,
                });
            }
            Section::Generators => generators.push(Generator {
                bus: int(0)?,
                p: num(1)? / base_mva,
                v_setpoint: num(2)?,
                x1: num(3)?,
                x0: num(4)?,
            }),
            Section::Loads => load_rows.push((int(0)?, num(1)?, num(2)?)),
            Section::Branches => {
                let tap = num(5)?;
                branches.push(Branch {
                    id: branches.len() + 1,
                    from: int(0)?,
                    to: int(1)?,
                    positive: SequenceBranch {
                        z: Complex64::new(num(2)?, num(3)?),
                        b: num(4)?,
                    },
                    zero: SequenceBranch {
                        z: Complex64::new(num(6)?, num(7)?),
                        b: num(8)?,
                    },
                    tap: if tap == 0.0 { 1.0 } else { tap },
                });
            }
        }
    }
    let loads = load_rows
        .into_iter()
        .map(|(bus, p, q)| Load {
            bus,
            s: Complex64::new(p, q) / base_mva,
        })
        .collect();
    let net = NetworkModel {
        base_mva,
        nominal_hz,
        buses,
        branches,
        generators,
        loads,
    };
    net.validate()?;
    Ok(net)
}

pub fn write_case(net: &NetworkModel) -> String {
    let mut out = String::new();
    let base = net.base_mva;
    let _ = writeln!(out, "base_mva {}", base);
    let _ = writeln!(out, "nominal_hz {}", net.nominal_hz);
    let _ = writeln!(out, "\n[buses]");
    for b in &net.buses {
        let kind = match b.kind {
            BusKind::Slack => "slack",
            BusKind::Pv => "pv",
            BusKind::Pq => "pq",
        };
        let _ = writeln!(out, "{} {} {} {} {}", b.id, kind, b.base_kv, b.shunt.re * base, b.shunt.im * base);
    }
    let _ = writeln!(out, "\n[generators]");
    for g in &net.generators {
        let _ = writeln!(out, "{} {} {} {} {}", g.bus, g.p * base, g.v_setpoint, g.x1, g.x0);
    }
    let _ = writeln!(out, "\n[loads]");
    for l in &net.loads {
        let _ = writeln!(out, "{} {} {}", l.bus, l.s.re * base, l.s.im * base);
    }
    let _ = writeln!(out, "\n[branches]");
    for br in &net.branches {
        let tap = if br.tap == 1.0 { 0.0 } else { br.tap };
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            br.from,
            br.to,
            br.positive.z.re,
            br.positive.z.im,
            br.positive.b,
            tap,
            br.zero.z.re,
            br.zero.z.im,
            br.zero.b
        );
    }
    out
}
