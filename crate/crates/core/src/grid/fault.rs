//! Shunt faults by symmetrical components.
//!
//! The three sequence networks are built with a temporary node at the fault
//! point. Each network's Zbus column at that node gives the Thevenin matrix
//! seen by the fault, which is solved in the phase domain against the fault
//! admittance and superimposed on the prefault state.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use super::network::{NetworkModel, Sequence};
use super::powerflow::{branch_pi, PowerFlow};
use super::sequence::{balanced, to_phase, to_seq, ALPHA};
use super::snapshot::SystemSnapshot;
use super::state::{End, OpenSet, PhasorState, Terminal};
use super::GridError;

pub const DEFAULT_LOCATIONS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const DEFAULT_IMPEDANCES_OHM: [f64; 4] = [0.01, 1.0, 10.0, 50.0];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Fault classes 1 to 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultType {
    AG = 1,
    BG,
    CG,
    ABG,
    BCG,
    CAG,
    AB,
    BC,
    CA,
    ABCG,
}

impl FaultType {
    pub const ALL: [FaultType; 10] = [
        FaultType::AG,
        FaultType::BG,
        FaultType::CG,
        FaultType::ABG,
        FaultType::BCG,
        FaultType::CAG,
        FaultType::AB,
        FaultType::BC,
        FaultType::CA,
        FaultType::ABCG,
    ];

    pub fn class(self) -> u8 {
        self as u8
    }

    pub fn from_class(class: u8) -> Result<FaultType, GridError> {
        FaultType::ALL
            .get((class as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| GridError::InvalidFault(format!("fault class {class} outside 1..=10")))
    }

    /// Faulted phases, 0 = A.
    pub fn phases(self) -> &'static [usize] {
        match self {
            FaultType::AG => &[0],
            FaultType::BG => &[1],
            FaultType::CG => &[2],
            FaultType::ABG | FaultType::AB => &[0, 1],
            FaultType::BCG | FaultType::BC => &[1, 2],
            FaultType::CAG | FaultType::CA => &[0, 2],
            FaultType::ABCG => &[0, 1, 2],
        }
    }

    pub fn grounded(self) -> bool {
        !matches!(self, FaultType::AB | FaultType::BC | FaultType::CA)
    }

    pub fn label(self) -> &'static str {
        match self {
            FaultType::AG => "A-gnd",
            FaultType::BG => "B-gnd",
            FaultType::CG => "C-gnd",
            FaultType::ABG => "AB-gnd",
            FaultType::BCG => "BC-gnd",
            FaultType::CAG => "AC-gnd",
            FaultType::AB => "A-B",
            FaultType::BC => "B-C",
            FaultType::CA => "A-C",
            FaultType::ABCG => "ABC-gnd",
        }
    }

    /// Phase-domain fault admittance: faulted phases meet at a star point
    /// through `1/y` each, grounded for ground faults.
    fn admittance(self, y: Complex64) -> Matrix3<Complex64> {
        let idx = self.phases();
        let mut m = Matrix3::from_element(ZERO);
        if self.grounded() {
            for &i in idx {
                m[(i, i)] = y;
            }
        } else {
            let share = 1.0 / idx.len() as f64;
            for &i in idx {
                for &k in idx {
                    let d = if i == k { 1.0 } else { 0.0 };
                    m[(i, k)] = y * (d - share);
                }
            }
        }
        m
    }
}

impl fmt::Display for FaultType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FaultType {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(c) = s.parse::<u8>() {
            return FaultType::from_class(c);
        }
        FaultType::ALL
            .iter()
            .copied()
            .find(|t| t.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| GridError::InvalidFault(format!("unknown fault type '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec {
    pub branch: usize,
    /// Fraction of the branch length from its `from` bus.
    pub location: f64,
    pub impedance_ohm: f64,
    pub fault_type: FaultType,
}

impl FaultSpec {
    pub fn validate(&self, net: &NetworkModel) -> Result<(), GridError> {
        net.branch(self.branch)?;
        if !(self.location > 0.0 && self.location < 1.0) {
            return Err(GridError::InvalidFault(format!(
                "location {} must lie strictly inside (0, 1)",
                self.location
            )));
        }
        if !(self.impedance_ohm > 0.0 && self.impedance_ohm.is_finite()) {
            return Err(GridError::InvalidFault(format!(
                "impedance {} ohm must be positive",
                self.impedance_ohm
            )));
        }
        Ok(())
    }

    /// Fault impedance in per-unit on the lower terminal voltage of the
    /// branch.
    pub fn impedance_pu(&self, net: &NetworkModel) -> Result<f64, GridError> {
        let br = net.branch(self.branch)?;
        let zb = net.z_base_ohm(br.from)?.min(net.z_base_ohm(br.to)?);
        Ok(self.impedance_ohm / zb)
    }
}

#[derive(Debug, Clone, Copy)]
enum FaultPoint {
    Bus(usize),
    Line { branch: usize, location: f64 },
}

/// During-fault snapshot of the intact network, starting from a balanced
/// prefault snapshot.
pub fn apply_fault(net: &NetworkModel, prefault: &SystemSnapshot, fault: &FaultSpec) -> Result<SystemSnapshot, GridError> {
    let base = PowerFlow::from_snapshot(net, prefault)?;
    let st = faulted_state(net, &base, fault, &OpenSet::new())?;
    Ok(st.snapshot(net.nominal_hz, prefault.time))
}

/// Phase voltages and terminal currents with `fault` applied and the
/// breakers in `open` open. Generator EMFs and load admittances come from
/// `base`.
pub fn faulted_state(net: &NetworkModel, base: &PowerFlow, fault: &FaultSpec, open: &OpenSet) -> Result<PhasorState, GridError> {
    fault.validate(net)?;
    let y = 1.0 / Complex64::new(fault.impedance_pu(net)?, 0.0);
    solve(
        net,
        base,
        Some((
            FaultPoint::Line {
                branch: fault.branch,
                location: fault.location,
            },
            fault.fault_type.admittance(y),
        )),
        open,
    )
}

/// Fault at a bus with the fault impedance given in per-unit.
pub fn bus_fault_state(
    net: &NetworkModel,
    base: &PowerFlow,
    bus: usize,
    fault_type: FaultType,
    z_pu: f64,
    open: &OpenSet,
) -> Result<PhasorState, GridError> {
    net.bus_index(bus)?;
    if !(z_pu > 0.0) {
        return Err(GridError::InvalidFault(format!("impedance {z_pu} pu must be positive")));
    }
    let y = 1.0 / Complex64::new(z_pu, 0.0);
    solve(net, base, Some((FaultPoint::Bus(bus), fault_type.admittance(y))), open)
}

/// Constant-impedance network with the same sources as `base` and no fault.
pub fn unfaulted_state(net: &NetworkModel, base: &PowerFlow, open: &OpenSet) -> Result<PhasorState, GridError> {
    solve(net, base, None, open)
}

struct TwoPort {
    a: usize,
    b: usize,
    pi: [[[Complex64; 2]; 2]; 3],
    terminals: [Option<usize>; 2],
}

struct Shunt {
    node: usize,
    y: [Complex64; 3],
    /// Positive-sequence source behind `y`.
    emf: Complex64,
    terminal: Option<usize>,
}

fn seq_index(s: Sequence) -> usize {
    match s {
        Sequence::Zero => 0,
        Sequence::Positive => 1,
        Sequence::Negative => 2,
    }
}

fn pi_all(net_br: &super::network::Branch, scale: f64, tap: f64) -> [[[Complex64; 2]; 2]; 3] {
    let mut out = [[[ZERO; 2]; 2]; 3];
    for s in Sequence::ALL {
        let d = net_br.data(s);
        out[seq_index(s)] = branch_pi(d.z * scale, d.b * scale, tap);
    }
    out
}

fn fortescue() -> Matrix3<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let a2 = ALPHA * ALPHA;
    Matrix3::new(one, one, one, one, a2, ALPHA, one, ALPHA, a2)
}

fn solve(
    net: &NetworkModel,
    base: &PowerFlow,
    fault: Option<(FaultPoint, Matrix3<Complex64>)>,
    open: &OpenSet,
) -> Result<PhasorState, GridError> {
    let n = net.bus_count();
    let line_node = matches!(fault, Some((FaultPoint::Line { .. }, _)));
    let nodes = n + usize::from(line_node);
    let fault_node = match fault {
        Some((FaultPoint::Bus(b), _)) => Some(b - 1),
        Some((FaultPoint::Line { .. }, _)) => Some(n),
        None => None,
    };

    let mut ports = Vec::with_capacity(net.branches.len() + 1);
    for br in &net.branches {
        let from_t = net.terminal_index(Terminal::Line { branch: br.id, end: End::From });
        let to_t = net.terminal_index(Terminal::Line { branch: br.id, end: End::To });
        let from_open = open.0.contains(&from_t);
        let to_open = open.0.contains(&to_t);
        match fault {
            Some((FaultPoint::Line { branch, location }, _)) if branch == br.id => {
                if !from_open {
                    ports.push(TwoPort {
                        a: br.from - 1,
                        b: n,
                        pi: pi_all(br, location, br.tap),
                        terminals: [Some(from_t), None],
                    });
                }
                if !to_open {
                    ports.push(TwoPort {
                        a: n,
                        b: br.to - 1,
                        pi: pi_all(br, 1.0 - location, 1.0),
                        terminals: [None, Some(to_t)],
                    });
                }
            }
            _ => {
                if !from_open && !to_open {
                    ports.push(TwoPort {
                        a: br.from - 1,
                        b: br.to - 1,
                        pi: pi_all(br, 1.0, br.tap),
                        terminals: [Some(from_t), Some(to_t)],
                    });
                }
            }
        }
    }

    let mut shunts = Vec::new();
    for bus in &net.buses {
        if bus.shunt.norm() > 0.0 {
            shunts.push(Shunt {
                node: bus.id - 1,
                y: [bus.shunt; 3],
                emf: ZERO,
                terminal: None,
            });
        }
    }
    let emfs = base.generator_emfs(net);
    for (i, g) in net.generators.iter().enumerate() {
        if open.is_open(net, Terminal::Generator(i)) {
            continue;
        }
        let y1 = 1.0 / (J * g.x1);
        shunts.push(Shunt {
            node: g.bus - 1,
            y: [1.0 / (J * g.x0), y1, y1],
            emf: emfs[i],
            terminal: Some(net.terminal_index(Terminal::Generator(i))),
        });
    }
    for (i, l) in net.loads.iter().enumerate() {
        let v = base.voltages[l.bus - 1];
        if open.is_open(net, Terminal::Load(i)) || v.norm() == 0.0 {
            continue;
        }
        let y = l.s.conj() / v.norm_sqr();
        shunts.push(Shunt {
            node: l.bus - 1,
            y: [ZERO, y, y],
            emf: ZERO,
            terminal: Some(net.terminal_index(Terminal::Load(i))),
        });
    }

    // Only the part of the network still tied to the slack is energized.
    let slack = net.slack_bus()? - 1;
    let mut adj = vec![Vec::new(); nodes];
    for p in &ports {
        adj[p.a].push(p.b);
        adj[p.b].push(p.a);
    }
    let mut live = BTreeSet::from([slack]);
    let mut queue = VecDeque::from([slack]);
    while let Some(k) = queue.pop_front() {
        for &m in &adj[k] {
            if live.insert(m) {
                queue.push_back(m);
            }
        }
    }
    let mut compact = vec![usize::MAX; nodes];
    for (c, &k) in live.iter().enumerate() {
        compact[k] = c;
    }
    let m = live.len();

    let mut ybus: [DMatrix<Complex64>; 3] = std::array::from_fn(|_| DMatrix::from_element(m, m, ZERO));
    for p in &ports {
        let (a, b) = (compact[p.a], compact[p.b]);
        if a == usize::MAX {
            continue;
        }
        for (s, y) in ybus.iter_mut().enumerate() {
            let pi = p.pi[s];
            y[(a, a)] += pi[0][0];
            y[(a, b)] += pi[0][1];
            y[(b, a)] += pi[1][0];
            y[(b, b)] += pi[1][1];
        }
    }
    let mut inj = DVector::from_element(m, ZERO);
    for sh in &shunts {
        let k = compact[sh.node];
        if k == usize::MAX {
            continue;
        }
        for (s, y) in ybus.iter_mut().enumerate() {
            y[(k, k)] += sh.y[s];
        }
        inj[k] += sh.emf * sh.y[1];
    }

    let lu: Vec<_> = ybus.iter().map(|y| y.clone().lu()).collect();
    let vpre = lu[1].solve(&inj).ok_or(GridError::Singular("positive-sequence admittance"))?;
    let mut vseq: Vec<[Complex64; 3]> = (0..m).map(|k| [ZERO, vpre[k], ZERO]).collect();

    let mut fault_current = None;
    let mut fault_voltage = None;
    if let (Some((_, yf)), Some(fnode)) = (fault, fault_node) {
        let f = compact[fnode];
        if f != usize::MAX {
            let mut e = DVector::from_element(m, ZERO);
            e[f] = Complex64::new(1.0, 0.0);
            let mut zcol = Vec::with_capacity(3);
            for (s, l) in lu.iter().enumerate() {
                let name = ["zero-sequence admittance", "positive-sequence admittance", "negative-sequence admittance"][s];
                zcol.push(l.solve(&e).ok_or(GridError::Singular(name))?);
            }
            let a = fortescue();
            let a_inv = a.try_inverse().ok_or(GridError::Singular("Fortescue"))?;
            let zth = Matrix3::from_diagonal(&Vector3::new(zcol[0][f], zcol[1][f], zcol[2][f]));
            let zabc = a * zth * a_inv;
            let vf = balanced(vpre[f]);
            let vf = Vector3::new(vf[0], vf[1], vf[2]);
            let lhs = Matrix3::identity() + yf * zabc;
            let i_f = lhs
                .lu()
                .solve(&(yf * vf))
                .ok_or(GridError::Singular("fault interface"))?;
            let i_seq = to_seq([i_f[0], i_f[1], i_f[2]]);
            for (k, v) in vseq.iter_mut().enumerate() {
                for s in 0..3 {
                    v[s] -= zcol[s][k] * i_seq[s];
                }
            }
            fault_current = Some([i_f[0], i_f[1], i_f[2]]);
            fault_voltage = Some(to_phase(vseq[f]));
        }
    }

    let node_seq = |k: usize| -> [Complex64; 3] {
        match compact[k] {
            usize::MAX => [ZERO; 3],
            c => vseq[c],
        }
    };
    let mut currents = vec![[ZERO; 3]; net.terminal_count()];
    for p in &ports {
        if compact[p.a] == usize::MAX {
            continue;
        }
        let (va, vb) = (node_seq(p.a), node_seq(p.b));
        let mut ia = [ZERO; 3];
        let mut ib = [ZERO; 3];
        for s in 0..3 {
            let pi = p.pi[s];
            ia[s] = pi[0][0] * va[s] + pi[0][1] * vb[s];
            ib[s] = pi[1][0] * va[s] + pi[1][1] * vb[s];
        }
        if let Some(t) = p.terminals[0] {
            currents[t] = to_phase(ia);
        }
        if let Some(t) = p.terminals[1] {
            currents[t] = to_phase(ib);
        }
    }
    for sh in &shunts {
        let Some(t) = sh.terminal else { continue };
        if compact[sh.node] == usize::MAX {
            continue;
        }
        let v = node_seq(sh.node);
        let i = [sh.y[0] * v[0], sh.y[1] * (v[1] - sh.emf), sh.y[2] * v[2]];
        currents[t] = to_phase(i);
    }

    Ok(PhasorState {
        voltages: (0..n).map(|k| to_phase(node_seq(k))).collect(),
        currents,
        fault_current,
        fault_voltage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::network::{Branch, Bus, BusKind, Generator, Load, SequenceBranch};
    use crate::grid::powerflow::PowerFlowOptions;
    use crate::grid::build_ieee14;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ieee14_base() -> (NetworkModel, PowerFlow) {
        let net = build_ieee14();
        let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default()).unwrap();
        (net, pf)
    }

    fn spec(branch: usize, location: f64, ohm: f64, t: FaultType) -> FaultSpec {
        FaultSpec {
            branch,
            location,
            impedance_ohm: ohm,
            fault_type: t,
        }
    }

    #[test]
    fn class_round_trip_and_labels() {
        for t in FaultType::ALL {
            assert_eq!(FaultType::from_class(t.class()).unwrap(), t);
            assert_eq!(t.label().parse::<FaultType>().unwrap(), t);
        }
        assert!(FaultType::from_class(0).is_err());
        assert!(FaultType::from_class(11).is_err());
        assert_eq!("2".parse::<FaultType>().unwrap(), FaultType::BG);
    }

    #[test]
    fn floating_star_admittance_draws_no_ground_current() {
        let y = FaultType::BC.admittance(c(3.0, 0.0));
        for col in 0..3 {
            let s: Complex64 = (0..3).map(|r| y[(r, col)]).sum();
            assert!(s.norm() < 1e-15);
        }
    }

    #[test]
    fn unfaulted_network_reproduces_power_flow() {
        let (net, pf) = ieee14_base();
        let st = unfaulted_state(&net, &pf, &OpenSet::new()).unwrap();
        let reference = pf.phasor_state(&net);
        for (a, b) in st.voltages.iter().zip(&reference.voltages) {
            for p in 0..3 {
                assert!((a[p] - b[p]).norm() < 1e-10);
            }
        }
        for (a, b) in st.currents.iter().zip(&reference.currents) {
            assert!((a[0] - b[0]).norm() < 1e-9);
        }
    }

    #[test]
    fn balanced_fault_has_no_unbalanced_components() {
        let (net, pf) = ieee14_base();
        for &loc in &DEFAULT_LOCATIONS {
            let st = faulted_state(&net, &pf, &spec(7, loc, 1.0, FaultType::ABCG), &OpenSet::new()).unwrap();
            for bus in 1..=14 {
                let s = st.voltage_seq(bus);
                assert!(s[0].norm() < 1e-9 && s[2].norm() < 1e-9, "bus {bus}: {s:?}");
            }
        }
    }

    #[test]
    fn single_line_to_ground_excites_zero_sequence() {
        let (net, pf) = ieee14_base();
        for t in [FaultType::AG, FaultType::BG, FaultType::CG] {
            let br = net.branch(13).unwrap();
            let st = faulted_state(&net, &pf, &spec(13, 0.5, 10.0, t), &OpenSet::new()).unwrap();
            assert!(st.voltage_seq(br.from)[0].norm() > 1e-3);
            assert!(st.voltage_seq(br.to)[0].norm() > 1e-3);
        }
    }

    /// Ground faults: lowest faulted phase to ground. Phase-phase faults:
    /// the voltage between the faulted phases.
    fn faulted_quantities(t: FaultType, v: [Complex64; 3]) -> Vec<f64> {
        let p = t.phases();
        if t.grounded() {
            vec![p.iter().map(|&i| v[i].norm()).fold(f64::INFINITY, f64::min)]
        } else {
            vec![(v[p[0]] - v[p[1]]).norm()]
        }
    }

    #[test]
    fn faulted_phase_sags_and_recovers_with_impedance() {
        let (net, pf) = ieee14_base();
        for branch in 1..=20 {
            for &loc in &DEFAULT_LOCATIONS {
                for t in FaultType::ALL {
                    let open = OpenSet::new();
                    let far = faulted_state(&net, &pf, &spec(branch, loc, 1e12, t), &open).unwrap();
                    let pre = faulted_quantities(t, far.fault_voltage.unwrap());
                    let mut last = vec![0.0; pre.len()];
                    for &ohm in &DEFAULT_IMPEDANCES_OHM {
                        let st = faulted_state(&net, &pf, &spec(branch, loc, ohm, t), &open).unwrap();
                        let now = faulted_quantities(t, st.fault_voltage.unwrap());
                        for k in 0..now.len() {
                            assert!(now[k] < pre[k], "branch {branch} {loc} {t} {ohm}: {now:?} vs {pre:?}");
                            assert!(now[k] >= last[k], "branch {branch} {loc} {t} {ohm}");
                        }
                        last = now;
                    }
                }
            }
        }
    }

    #[test]
    fn bolted_three_phase_bus_fault_matches_zbus_diagonal() {
        let mk_bus = |id, kind| Bus {
            id,
            kind,
            base_kv: 10.0,
            shunt: c(0.0, 0.0),
        };
        let mk_line = |id, from, to, z: Complex64| Branch {
            id,
            from,
            to,
            positive: SequenceBranch { z, b: 0.0 },
            zero: SequenceBranch { z: 3.0 * z, b: 0.0 },
            tap: 1.0,
        };
        let net = NetworkModel {
            base_mva: 100.0,
            nominal_hz: 60.0,
            buses: vec![mk_bus(1, BusKind::Slack), mk_bus(2, BusKind::Pq), mk_bus(3, BusKind::Pq)],
            branches: vec![
                mk_line(1, 1, 2, c(0.01, 0.1)),
                mk_line(2, 2, 3, c(0.02, 0.15)),
                mk_line(3, 1, 3, c(0.01, 0.2)),
            ],
            generators: vec![Generator {
                bus: 1,
                p: 0.0,
                v_setpoint: 1.0,
                x1: 0.2,
                x0: 0.05,
            }],
            loads: vec![Load { bus: 3, s: c(0.5, 0.2) }],
        };
        let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default()).unwrap();

        // Positive-sequence Ybus with the generator and the load as impedances.
        let mut y = DMatrix::from_element(3, 3, c(0.0, 0.0));
        for br in &net.branches {
            let ys = 1.0 / br.positive.z;
            let (i, k) = (br.from - 1, br.to - 1);
            y[(i, i)] += ys;
            y[(k, k)] += ys;
            y[(i, k)] -= ys;
            y[(k, i)] -= ys;
        }
        y[(0, 0)] += 1.0 / c(0.0, 0.2);
        y[(2, 2)] += c(0.5, -0.2) / pf.voltages[2].norm_sqr();
        let z = y.try_inverse().unwrap();

        let zf = 0.05;
        for bus in 1..=3 {
            let st = bus_fault_state(&net, &pf, bus, FaultType::ABCG, zf, &OpenSet::new()).unwrap();
            let expected = pf.voltages[bus - 1] / (z[(bus - 1, bus - 1)] + zf);
            let got = st.fault_current.unwrap()[0];
            assert!((got - expected).norm() < 1e-9, "bus {bus}: {got} vs {expected}");
        }
    }

    #[test]
    fn fault_on_a_fully_open_branch_has_no_effect() {
        let (net, pf) = ieee14_base();
        let open = OpenSet::from_branches(&net, &BTreeSet::from([13]));
        let st = faulted_state(&net, &pf, &spec(13, 0.4, 1.0, FaultType::BG), &open).unwrap();
        assert!(st.fault_current.is_none());
        let clean = unfaulted_state(&net, &pf, &open).unwrap();
        assert_eq!(st.voltages, clean.voltages);
    }

    #[test]
    fn one_open_end_still_feeds_from_the_other() {
        let (net, pf) = ieee14_base();
        let mut open = OpenSet::new();
        open.0.insert(net.terminal_index(Terminal::Line { branch: 13, end: End::To }));
        let st = faulted_state(&net, &pf, &spec(13, 0.4, 1.0, FaultType::BG), &open).unwrap();
        let i_from = st.current(&net, Terminal::Line { branch: 13, end: End::From })[1].norm();
        let i_to = st.current(&net, Terminal::Line { branch: 13, end: End::To })[1].norm();
        assert!(i_from > 1.0);
        assert_eq!(i_to, 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let (net, pf) = ieee14_base();
        for f in [
            spec(21, 0.4, 1.0, FaultType::AG),
            spec(3, 0.0, 1.0, FaultType::AG),
            spec(3, 1.0, 1.0, FaultType::AG),
            spec(3, 0.5, 0.0, FaultType::AG),
        ] {
            assert!(faulted_state(&net, &pf, &f, &OpenSet::new()).is_err());
        }
    }

    #[test]
    fn apply_fault_from_snapshot_matches_state_path() {
        let (net, pf) = ieee14_base();
        let pre = pf.snapshot(&net, 0.5);
        let f = spec(13, 0.4, 1.0, FaultType::BG);
        let snap = apply_fault(&net, &pre, &f).unwrap();
        let direct = faulted_state(&net, &pf, &f, &OpenSet::new()).unwrap().snapshot(60.0, 0.5);
        for (a, b) in snap.buses.iter().zip(&direct.buses) {
            for p in 0..3 {
                assert!((a.magnitude[p] - b.magnitude[p]).abs() < 1e-12);
            }
        }
        assert_eq!(snap.time, 0.5);
    }
}
