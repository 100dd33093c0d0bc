use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::network::{BusKind, NetworkModel, Sequence};
use super::sequence::{balanced, to_seq};
use super::snapshot::SystemSnapshot;
use super::state::{End, OpenSet, PhasorState, Terminal};
use super::GridError;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlowOptions {
    /// Largest allowed P/Q mismatch, per-unit.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        PowerFlowOptions {
            tolerance: 1e-10,
            max_iterations: 30,
        }
    }
}

/// Two-port admittance of a pi section with an off-nominal tap at the first
/// port: `[[yff, yft], [ytf, ytt]]`.
pub(crate) fn branch_pi(z: Complex64, b: f64, tap: f64) -> [[Complex64; 2]; 2] {
    let ys = 1.0 / z;
    let half = Complex64::new(0.0, b / 2.0);
    [
        [(ys + half) / (tap * tap), -ys / tap],
        [-ys / tap, ys + half],
    ]
}

/// Positive-sequence bus admittance matrix without generators or loads.
pub(crate) fn network_ybus(net: &NetworkModel, out: &BTreeSet<usize>) -> DMatrix<Complex64> {
    let n = net.bus_count();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for br in &net.branches {
        if out.contains(&br.id) {
            continue;
        }
        let d = br.data(Sequence::Positive);
        let m = branch_pi(d.z, d.b, br.tap);
        let (i, k) = (br.from - 1, br.to - 1);
        y[(i, i)] += m[0][0];
        y[(i, k)] += m[0][1];
        y[(k, i)] += m[1][0];
        y[(k, k)] += m[1][1];
    }
    for bus in &net.buses {
        y[(bus.id - 1, bus.id - 1)] += bus.shunt;
    }
    y
}

/// Solved positive-sequence operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlow {
    /// Positive-sequence bus voltages; zero on de-energized buses.
    pub voltages: Vec<Complex64>,
    pub energized: Vec<bool>,
    pub open: OpenSet,
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl PowerFlow {
    /// Newton-Raphson solution with the breakers in `open` open.
    ///
    /// Buses cut off from the slack are de-energized if they carry no load;
    /// a cut-off load is an error.
    pub fn solve(net: &NetworkModel, open: &OpenSet, opts: PowerFlowOptions) -> Result<PowerFlow, GridError> {
        let n = net.bus_count();
        let slack = net.slack_bus()?;
        let gen_closed: Vec<bool> = (0..net.generators.len())
            .map(|i| !open.is_open(net, Terminal::Generator(i)))
            .collect();
        if !net
            .generators
            .iter()
            .zip(&gen_closed)
            .any(|(g, &c)| c && g.bus == slack)
        {
            return Err(GridError::Invalid(format!("slack bus {slack} has no connected generator")));
        }
        let out = open.out_branches(net);
        let reach = net.reachable_from(slack, &out);
        let mut islanded_loads = Vec::new();
        for (i, l) in net.loads.iter().enumerate() {
            if !reach.contains(&l.bus) && !open.is_open(net, Terminal::Load(i)) && l.s.norm() > 0.0 {
                islanded_loads.push(l.bus);
            }
        }
        if !islanded_loads.is_empty() {
            islanded_loads.sort_unstable();
            islanded_loads.dedup();
            return Err(GridError::Islanded(islanded_loads));
        }
        let energized: Vec<bool> = (1..=n).map(|b| reach.contains(&b)).collect();

        let ybus = network_ybus(net, &out);
        let mut p_spec = vec![0.0; n];
        let mut q_spec = vec![0.0; n];
        for (i, l) in net.loads.iter().enumerate() {
            if !open.is_open(net, Terminal::Load(i)) {
                p_spec[l.bus - 1] -= l.s.re;
                q_spec[l.bus - 1] -= l.s.im;
            }
        }
        let mut vset: Vec<Option<f64>> = vec![None; n];
        for (g, &closed) in net.generators.iter().zip(&gen_closed) {
            if closed && energized[g.bus - 1] {
                p_spec[g.bus - 1] += g.p;
                vset[g.bus - 1] = Some(g.v_setpoint);
            }
        }
        let mut pvpq = Vec::new();
        let mut pq = Vec::new();
        for bus in &net.buses {
            let i = bus.id - 1;
            if !energized[i] || bus.id == slack {
                continue;
            }
            pvpq.push(i);
            if !(bus.kind == BusKind::Pv && vset[i].is_some()) {
                pq.push(i);
            }
        }

        let mut vm: Vec<f64> = (0..n)
            .map(|i| match (net.buses[i].kind, vset[i]) {
                (BusKind::Slack | BusKind::Pv, Some(v)) => v,
                _ => 1.0,
            })
            .collect();
        let mut va = vec![0.0; n];
        let npv = pvpq.len();
        let dim = npv + pq.len();
        let mut iterations = 0;
        loop {
            let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
            let vv = DVector::from_vec(v.clone());
            let ibus = &ybus * &vv;
            let s: Vec<Complex64> = (0..n).map(|i| v[i] * ibus[i].conj()).collect();
            let mut mis = DVector::zeros(dim);
            let mut worst = (0.0f64, slack);
            for (r, &i) in pvpq.iter().enumerate() {
                mis[r] = s[i].re - p_spec[i];
                if mis[r].abs() > worst.0 {
                    worst = (mis[r].abs(), i + 1);
                }
            }
            for (r, &i) in pq.iter().enumerate() {
                mis[npv + r] = s[i].im - q_spec[i];
                if mis[npv + r].abs() > worst.0 {
                    worst = (mis[npv + r].abs(), i + 1);
                }
            }
            if worst.0 < opts.tolerance {
                let voltages = (0..n).map(|i| if energized[i] { v[i] } else { Complex64::new(0.0, 0.0) }).collect();
                return Ok(PowerFlow {
                    voltages,
                    energized,
                    open: open.clone(),
                    iterations,
                    max_mismatch: worst.0,
                });
            }
            if iterations >= opts.max_iterations || !worst.0.is_finite() {
                return Err(GridError::NoConvergence {
                    iterations,
                    worst_mismatch: worst.0,
                    bus: worst.1,
                });
            }
            // dS/dθ and dS/d|V| (complex), then split into the real Jacobian.
            let mut jac = DMatrix::zeros(dim, dim);
            let ds_dva = |i: usize, k: usize| -> Complex64 {
                let diag = if i == k { ibus[i] } else { Complex64::new(0.0, 0.0) };
                J * v[i] * (diag - ybus[(i, k)] * v[k]).conj()
            };
            let ds_dvm = |i: usize, k: usize| -> Complex64 {
                let unit_k = v[k] / vm[k];
                let mut d = v[i] * (ybus[(i, k)] * unit_k).conj();
                if i == k {
                    d += ibus[i].conj() * unit_k;
                }
                d
            };
            for (r, &i) in pvpq.iter().enumerate() {
                for (c, &k) in pvpq.iter().enumerate() {
                    jac[(r, c)] = ds_dva(i, k).re;
                }
                for (c, &k) in pq.iter().enumerate() {
                    jac[(r, npv + c)] = ds_dvm(i, k).re;
                }
            }
            for (r, &i) in pq.iter().enumerate() {
                for (c, &k) in pvpq.iter().enumerate() {
                    jac[(npv + r, c)] = ds_dva(i, k).im;
                }
                for (c, &k) in pq.iter().enumerate() {
                    jac[(npv + r, npv + c)] = ds_dvm(i, k).im;
                }
            }
            let dx = jac.lu().solve(&mis).ok_or(GridError::Singular("power-flow Jacobian"))?;
            for (r, &i) in pvpq.iter().enumerate() {
                va[i] -= dx[r];
            }
            for (r, &i) in pq.iter().enumerate() {
                vm[i] -= dx[npv + r];
            }
            iterations += 1;
        }
    }

    /// Operating point read back from a balanced snapshot of the intact
    /// network.
    pub fn from_snapshot(net: &NetworkModel, snap: &SystemSnapshot) -> Result<PowerFlow, GridError> {
        if snap.buses.len() != net.bus_count() {
            return Err(GridError::Invalid(format!(
                "snapshot has {} buses, network has {}",
                snap.buses.len(),
                net.bus_count()
            )));
        }
        let voltages: Vec<Complex64> = snap.buses.iter().map(|b| to_seq(b.phasors())[1]).collect();
        let energized = voltages.iter().map(|v| v.norm() > 0.0).collect();
        Ok(PowerFlow {
            voltages,
            energized,
            open: OpenSet::new(),
            iterations: 0,
            max_mismatch: 0.0,
        })
    }

    fn injections(&self, net: &NetworkModel) -> Vec<Complex64> {
        let y = network_ybus(net, &self.open.out_branches(net));
        let v = DVector::from_vec(self.voltages.clone());
        let i = y * &v;
        (0..net.bus_count()).map(|k| v[k] * i[k].conj()).collect()
    }

    /// Complex output of every generator (zero when open or de-energized).
    pub fn generator_powers(&self, net: &NetworkModel) -> Vec<Complex64> {
        let s_inj = self.injections(net);
        let mut out = vec![Complex64::new(0.0, 0.0); net.generators.len()];
        for bus in 1..=net.bus_count() {
            if !self.energized[bus - 1] {
                continue;
            }
            let gens: Vec<usize> = (0..net.generators.len())
                .filter(|&i| net.generators[i].bus == bus && !self.open.is_open(net, Terminal::Generator(i)))
                .collect();
            if gens.is_empty() {
                continue;
            }
            let mut s = s_inj[bus - 1];
            for (i, l) in net.loads.iter().enumerate() {
                if l.bus == bus && !self.open.is_open(net, Terminal::Load(i)) {
                    s += l.s;
                }
            }
            for &g in &gens {
                out[g] = s / gens.len() as f64;
            }
        }
        out
    }

    /// Internal voltage behind the subtransient reactance.
    pub fn generator_emfs(&self, net: &NetworkModel) -> Vec<Complex64> {
        self.generator_powers(net)
            .iter()
            .zip(&net.generators)
            .map(|(s, g)| {
                let v = self.voltages[g.bus - 1];
                if v.norm() == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    v + J * g.x1 * (s / v).conj()
                }
            })
            .collect()
    }

    pub fn phasor_state(&self, net: &NetworkModel) -> PhasorState {
        let v = &self.voltages;
        let mut currents = vec![[Complex64::new(0.0, 0.0); 3]; net.terminal_count()];
        for br in &net.branches {
            if self.open.branch_out(net, br.id) {
                continue;
            }
            let m = branch_pi(br.positive.z, br.positive.b, br.tap);
            let (vf, vt) = (v[br.from - 1], v[br.to - 1]);
            let i_from = m[0][0] * vf + m[0][1] * vt;
            let i_to = m[1][0] * vf + m[1][1] * vt;
            currents[net.terminal_index(Terminal::Line { branch: br.id, end: End::From })] = balanced(i_from);
            currents[net.terminal_index(Terminal::Line { branch: br.id, end: End::To })] = balanced(i_to);
        }
        for (i, s) in self.generator_powers(net).iter().enumerate() {
            let vb = v[net.generators[i].bus - 1];
            if vb.norm() > 0.0 {
                currents[net.terminal_index(Terminal::Generator(i))] = balanced(-(s / vb).conj());
            }
        }
        for (i, l) in net.loads.iter().enumerate() {
            let vb = v[l.bus - 1];
            if vb.norm() > 0.0 && !self.open.is_open(net, Terminal::Load(i)) {
                currents[net.terminal_index(Terminal::Load(i))] = balanced((l.s / vb).conj());
            }
        }
        PhasorState {
            voltages: v.iter().map(|&x| balanced(x)).collect(),
            currents,
            fault_current: None,
            fault_voltage: None,
        }
    }

    pub fn snapshot(&self, net: &NetworkModel, time: f64) -> SystemSnapshot {
        let v: Vec<[Complex64; 3]> = self.voltages.iter().map(|&x| balanced(x)).collect();
        SystemSnapshot::from_phase_voltages(&v, net.nominal_hz, time)
    }
}

/// Balanced steady state of the intact network, replicated to three phases.
pub fn solve_power_flow(net: &NetworkModel) -> Result<SystemSnapshot, GridError> {
    Ok(PowerFlow::solve(net, &OpenSet::new(), PowerFlowOptions::default())?.snapshot(net, 0.0))
}

/// Steady state after the listed branches are switched out at both ends.
pub fn post_trip_state(net: &NetworkModel, open_branches: &BTreeSet<usize>) -> Result<SystemSnapshot, GridError> {
    for &b in open_branches {
        net.branch(b)?;
    }
    let open = OpenSet::from_branches(net, open_branches);
    Ok(PowerFlow::solve(net, &open, PowerFlowOptions::default())?.snapshot(net, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::network::{Branch, Bus, Generator, Load, SequenceBranch};
    use crate::grid::build_ieee14;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bus(id: usize, kind: BusKind) -> Bus {
        Bus {
            id,
            kind,
            base_kv: 10.0,
            shunt: c(0.0, 0.0),
        }
    }

    fn line(id: usize, from: usize, to: usize, z: Complex64) -> Branch {
        Branch {
            id,
            from,
            to,
            positive: SequenceBranch { z, b: 0.0 },
            zero: SequenceBranch { z: 3.0 * z, b: 0.0 },
            tap: 1.0,
        }
    }

    fn two_bus() -> NetworkModel {
        NetworkModel {
            base_mva: 100.0,
            nominal_hz: 60.0,
            buses: vec![bus(1, BusKind::Slack), bus(2, BusKind::Pq)],
            branches: vec![line(1, 1, 2, c(0.0, 0.1))],
            generators: vec![Generator {
                bus: 1,
                p: 0.0,
                v_setpoint: 1.0,
                x1: 0.25,
                x0: 0.05,
            }],
            loads: vec![Load { bus: 2, s: c(1.0, 0.0) }],
        }
    }

    #[test]
    fn two_bus_matches_hand_solution() {
        // V2 = m∠θ. P = -m sin(θ) / 0.1 = 1 and Q = (m cos(θ) - m²) / 0.1 = 0
        // give m⁴ - m² + 0.01 = 0 and sin(θ) = -0.1 / m.
        let m2 = (1.0 + (1.0f64 - 0.04).sqrt()) / 2.0;
        let m = m2.sqrt();
        let theta = (-0.1 / m).asin();
        let expected = Complex64::from_polar(m, theta);
        let pf = PowerFlow::solve(&two_bus(), &OpenSet::new(), PowerFlowOptions::default()).unwrap();
        assert!((pf.voltages[1] - expected).norm() < 1e-9, "{} vs {}", pf.voltages[1], expected);
        assert!(pf.max_mismatch < 1e-8);
    }

    #[test]
    fn ieee14_matches_published_solution() {
        // Solved voltages from the public IEEE 14-bus data (|V| pu, angle deg).
        let published = [
            (1.060, 0.0),
            (1.045, -4.98),
            (1.010, -12.72),
            (1.018, -10.33),
            (1.020, -8.78),
            (1.070, -14.22),
            (1.062, -13.37),
            (1.090, -13.36),
            (1.056, -14.94),
            (1.051, -15.10),
            (1.057, -14.79),
            (1.055, -15.07),
            (1.050, -15.16),
            (1.036, -16.04),
        ];
        let net = build_ieee14();
        let snap = solve_power_flow(&net).unwrap();
        for (b, &(m, a)) in snap.buses.iter().zip(published.iter()) {
            assert!((b.magnitude[0] - m).abs() < 1e-3, "{} vs {m}", b.magnitude[0]);
            assert!((b.angle[0].to_degrees() - a).abs() < 0.02, "{} vs {a}", b.angle[0].to_degrees());
            assert_eq!(b.frequency, [60.0; 3]);
            assert!((b.angle[1] - b.angle[0] + 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn no_flow_network_sits_at_slack_setpoint() {
        let mut net = build_ieee14();
        for l in &mut net.loads {
            l.s = c(0.0, 0.0);
        }
        for g in &mut net.generators {
            g.p = 0.0;
            g.v_setpoint = 1.06;
        }
        for br in &mut net.branches {
            br.positive.b = 0.0;
            br.tap = 1.0;
        }
        for b in &mut net.buses {
            b.shunt = c(0.0, 0.0);
        }
        let snap = solve_power_flow(&net).unwrap();
        for b in &snap.buses {
            assert!((b.magnitude[0] - 1.06).abs() < 1e-12);
            assert!(b.angle[0].abs() < 1e-12);
        }
    }

    #[test]
    fn empty_outage_set_is_identity() {
        let net = build_ieee14();
        assert_eq!(post_trip_state(&net, &BTreeSet::new()).unwrap(), solve_power_flow(&net).unwrap());
    }

    #[test]
    fn parallel_pair_carries_full_transfer_after_outage() {
        let mut net = two_bus();
        net.branches.push(line(2, 1, 2, c(0.0, 0.1)));
        let open = OpenSet::from_branches(&net, &BTreeSet::from([2]));
        let pf = PowerFlow::solve(&net, &open, PowerFlowOptions::default()).unwrap();
        let st = pf.phasor_state(&net);
        let into_line = st.currents[net.terminal_index(Terminal::Line { branch: 1, end: End::From })][0];
        let s = pf.voltages[0] * into_line.conj();
        assert!((s.re - 1.0).abs() < 1e-9);
        assert_eq!(st.currents[2], [c(0.0, 0.0); 3]);
    }

    #[test]
    fn islanding_a_load_is_an_error_naming_the_bus() {
        let net = two_bus();
        let err = post_trip_state(&net, &BTreeSet::from([1])).unwrap_err();
        assert_eq!(err, GridError::Islanded(vec![2]));
    }

    #[test]
    fn load_free_island_is_de_energized() {
        let net = build_ieee14();
        let snap = post_trip_state(&net, &BTreeSet::from([14])).unwrap();
        assert_eq!(snap.bus(8).unwrap().magnitude, [0.0; 3]);
        assert!(snap.bus(7).unwrap().magnitude[0] > 0.9);
    }

    #[test]
    fn iteration_cap_reports_worst_mismatch() {
        let net = build_ieee14().with_load_scale(8.0);
        let err = PowerFlow::solve(
            &net,
            &OpenSet::new(),
            PowerFlowOptions {
                tolerance: 1e-10,
                max_iterations: 2,
            },
        )
        .unwrap_err();
        match err {
            GridError::NoConvergence {
                iterations,
                worst_mismatch,
                ..
            } => {
                assert_eq!(iterations, 2);
                assert!(worst_mismatch > 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn terminal_currents_balance_at_every_bus() {
        let net = build_ieee14();
        let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default()).unwrap();
        let st = pf.phasor_state(&net);
        let mut sum = vec![c(0.0, 0.0); 14];
        for (t, i) in net.terminals().iter().zip(&st.currents) {
            sum[t.bus(&net) - 1] += i[0];
        }
        for b in &net.buses {
            sum[b.id - 1] += b.shunt * pf.voltages[b.id - 1];
            assert!(sum[b.id - 1].norm() < 1e-8, "bus {} residual {}", b.id, sum[b.id - 1]);
        }
    }
}
