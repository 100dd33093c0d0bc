//! Symmetrical-component fault results against a brute-force phase-domain
//! nodal solve. The oracle builds a 3n x 3n admittance matrix directly from
//! per-phase element models, wires the fault as explicit resistive links to a
//! star node, and solves for every node voltage.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

use digisub::grid::{
    faulted_state, Branch, Bus, BusKind, FaultSpec, FaultType, Generator, Load, NetworkModel, OpenSet, PowerFlow,
    PowerFlowOptions, SequenceBranch,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn a_matrix() -> Matrix3<Complex64> {
    let a = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let one = c(1.0, 0.0);
    Matrix3::new(one, one, one, one, a * a, a, one, a, a * a)
}

/// Phase-domain matrix of a symmetrical element with sequence values
/// (zero, positive, negative).
fn phase_of(y0: Complex64, y1: Complex64, y2: Complex64) -> Matrix3<Complex64> {
    let a = a_matrix();
    a * Matrix3::from_diagonal(&nalgebra::Vector3::new(y0, y1, y2)) * a.try_inverse().unwrap()
}

struct Nodal {
    y: DMatrix<Complex64>,
    i: DVector<Complex64>,
}

impl Nodal {
    fn new(nodes: usize) -> Nodal {
        Nodal {
            y: DMatrix::from_element(3 * nodes + 1, 3 * nodes + 1, c(0.0, 0.0)),
            i: DVector::from_element(3 * nodes + 1, c(0.0, 0.0)),
        }
    }

    fn block(&mut self, r: usize, k: usize, m: &Matrix3<Complex64>) {
        for p in 0..3 {
            for q in 0..3 {
                self.y[(3 * r + p, 3 * k + q)] += m[(p, q)];
            }
        }
    }

    /// Series element between nodes a and b (sequence data z0/z1, charging
    /// b0/b1), off-nominal tap at a.
    fn series(&mut self, a: usize, b: usize, z0: Complex64, z1: Complex64, b0: f64, b1: f64, tap: f64) {
        let ys = phase_of(1.0 / z0, 1.0 / z1, 1.0 / z1);
        let ysh = phase_of(c(0.0, b0 / 2.0), c(0.0, b1 / 2.0), c(0.0, b1 / 2.0));
        self.block(a, a, &((ys + ysh) / c(tap * tap, 0.0)));
        self.block(a, b, &(-ys / c(tap, 0.0)));
        self.block(b, a, &(-ys / c(tap, 0.0)));
        self.block(b, b, &(ys + ysh));
    }

    fn shunt(&mut self, a: usize, m: &Matrix3<Complex64>) {
        self.block(a, a, m);
    }

    fn solve(self) -> DVector<Complex64> {
        self.y.lu().solve(&self.i).unwrap()
    }
}

/// Phase voltages at every bus from the brute-force nodal model.
pub fn nodal_fault(net: &NetworkModel, pf: &PowerFlow, f: &FaultSpec) -> Vec<[Complex64; 3]> {
    let n = net.buses.len();
    let fnode = n;
    let star = 3 * (n + 1);
    let mut sys = Nodal::new(n + 1);

    for br in &net.branches {
        let (z1, b1, z0, b0) = (br.positive.z, br.positive.b, br.zero.z, br.zero.b);
        if br.id == f.branch {
            let x = f.location;
            sys.series(br.from - 1, fnode, z0 * x, z1 * x, b0 * x, b1 * x, br.tap);
            let y = 1.0 - x;
            sys.series(fnode, br.to - 1, z0 * y, z1 * y, b0 * y, b1 * y, 1.0);
        } else {
            sys.series(br.from - 1, br.to - 1, z0, z1, b0, b1, br.tap);
        }
    }
    for bus in &net.buses {
        sys.shunt(bus.id - 1, &(Matrix3::identity() * bus.shunt));
    }

    // Generator output from the solved operating point: S = V conj(I) + load.
    let v: Vec<Complex64> = pf.voltages.clone();
    let mut ybus = DMatrix::from_element(n, n, c(0.0, 0.0));
    for br in &net.branches {
        let ys = 1.0 / br.positive.z;
        let half = c(0.0, br.positive.b / 2.0);
        let t = br.tap;
        let (i, k) = (br.from - 1, br.to - 1);
        ybus[(i, i)] += (ys + half) / (t * t);
        ybus[(i, k)] -= ys / t;
        ybus[(k, i)] -= ys / t;
        ybus[(k, k)] += ys + half;
    }
    for bus in &net.buses {
        ybus[(bus.id - 1, bus.id - 1)] += bus.shunt;
    }
    let inj = &ybus * DVector::from_vec(v.clone());
    let a = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    for g in &net.generators {
        let k = g.bus - 1;
        let mut s = v[k] * inj[k].conj();
        for l in net.loads.iter().filter(|l| l.bus == g.bus) {
            s += l.s;
        }
        let e = v[k] + c(0.0, g.x1) * (s / v[k]).conj();
        let yg = phase_of(1.0 / c(0.0, g.x0), 1.0 / c(0.0, g.x1), 1.0 / c(0.0, g.x1));
        sys.shunt(k, &yg);
        let e_abc = nalgebra::Vector3::new(e, e * a * a, e * a);
        let src = yg * e_abc;
        for p in 0..3 {
            sys.i[3 * k + p] += src[p];
        }
    }
    for l in &net.loads {
        let k = l.bus - 1;
        let y = l.s.conj() / v[k].norm_sqr();
        sys.shunt(k, &phase_of(c(0.0, 0.0), y, y));
    }

    // Fault links: phase -> star through Zf; the star is ground for ground
    // faults and a free node otherwise.
    let br = net.branch(f.branch).unwrap();
    let kv = net.buses[br.from - 1].base_kv.min(net.buses[br.to - 1].base_kv);
    let zf = f.impedance_ohm / (kv * kv / net.base_mva);
    let yf = c(1.0 / zf, 0.0);
    for &p in f.fault_type.phases() {
        let r = 3 * fnode + p;
        sys.y[(r, r)] += yf;
        if !f.fault_type.grounded() {
            sys.y[(r, star)] -= yf;
            sys.y[(star, r)] -= yf;
            sys.y[(star, star)] += yf;
        }
    }
    if f.fault_type.grounded() {
        // The unused star row must still be non-singular.
        sys.y[(star, star)] += c(1.0, 0.0);
    }

    let x = sys.solve();
    (0..n).map(|k| [x[3 * k], x[3 * k + 1], x[3 * k + 2]]).collect()
}

pub fn three_bus() -> NetworkModel {
    let bus = |id, kind, kv| Bus {
        id,
        kind,
        base_kv: kv,
        shunt: c(0.0, 0.0),
    };
    let mut b3 = bus(3, BusKind::Pq, 69.0);
    b3.shunt = c(0.0, 0.05);
    NetworkModel {
        base_mva: 100.0,
        nominal_hz: 60.0,
        buses: vec![bus(1, BusKind::Slack, 138.0), bus(2, BusKind::Pv, 138.0), b3],
        branches: vec![
            Branch {
                id: 1,
                from: 1,
                to: 2,
                positive: SequenceBranch { z: c(0.02, 0.08), b: 0.04 },
                zero: SequenceBranch { z: c(0.06, 0.24), b: 0.03 },
                tap: 1.0,
            },
            Branch {
                id: 2,
                from: 2,
                to: 3,
                positive: SequenceBranch { z: c(0.0, 0.2), b: 0.0 },
                zero: SequenceBranch { z: c(0.0, 0.2), b: 0.0 },
                tap: 0.97,
            },
            Branch {
                id: 3,
                from: 1,
                to: 3,
                positive: SequenceBranch { z: c(0.05, 0.25), b: 0.02 },
                zero: SequenceBranch { z: c(0.15, 0.75), b: 0.02 },
                tap: 1.0,
            },
        ],
        generators: vec![
            Generator {
                bus: 1,
                p: 0.0,
                v_setpoint: 1.05,
                x1: 0.2,
                x0: 0.05,
            },
            Generator {
                bus: 2,
                p: 0.4,
                v_setpoint: 1.03,
                x1: 0.25,
                x0: 0.06,
            },
        ],
        loads: vec![Load { bus: 3, s: c(0.9, 0.3) }, Load { bus: 2, s: c(0.2, 0.1) }],
    }
}

pub fn max_diff(a: &[[Complex64; 3]], b: &[[Complex64; 3]]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..3).map(move |p| (x[p] - y[p]).norm()))
        .fold(0.0, f64::max)
}

/// Worst bus-voltage difference between the sequence-network solution and
/// the nodal oracle on the 3-bus network, over every fault type, branch and
/// a spread of locations and impedances.
pub fn three_bus_worst_diff() -> f64 {
    let net = three_bus();
    let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default()).unwrap();
    let mut worst = 0f64;
    for t in FaultType::ALL {
        for branch in 1..=3 {
            for &(loc, ohm) in &[(0.2, 0.01), (0.5, 1.0), (0.8, 50.0)] {
                let f = FaultSpec {
                    branch,
                    location: loc,
                    impedance_ohm: ohm,
                    fault_type: t,
                };
                let ours = faulted_state(&net, &pf, &f, &OpenSet::new()).unwrap();
                worst = worst.max(max_diff(&ours.voltages, &nodal_fault(&net, &pf, &f)));
            }
        }
    }
    worst
}
