use std::collections::{BTreeSet, VecDeque};

use num_complex::Complex64;

use super::GridError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    /// 1-based bus number.
    pub id: usize,
    pub kind: BusKind,
    pub base_kv: f64,
    /// Shunt admittance in per-unit (G + jB).
    pub shunt: Complex64,
}

/// Series impedance, total line charging and off-nominal tap of a branch, for
/// one sequence network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceBranch {
    pub z: Complex64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// 1-based branch number (file order).
    pub id: usize,
    pub from: usize,
    pub to: usize,
    /// Positive (and negative) sequence data.
    pub positive: SequenceBranch,
    pub zero: SequenceBranch,
    /// Off-nominal turns ratio at the `from` end; 1.0 for lines.
    pub tap: f64,
}

impl Branch {
    pub fn data(&self, seq: Sequence) -> SequenceBranch {
        match seq {
            Sequence::Zero => self.zero,
            Sequence::Positive | Sequence::Negative => self.positive,
        }
    }

    pub fn is_transformer(&self) -> bool {
        self.tap != 1.0 || self.positive.z.re == 0.0
    }

    pub fn other_end(&self, bus: usize) -> usize {
        if bus == self.from {
            self.to
        } else {
            self.from
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: usize,
    /// Scheduled active power, per-unit.
    pub p: f64,
    pub v_setpoint: f64,
    /// Subtransient reactance used for the positive and negative sequence.
    pub x1: f64,
    /// Zero-sequence path to ground.
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub bus: usize,
    /// Complex demand, per-unit.
    pub s: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sequence {
    Zero,
    Positive,
    Negative,
}

impl Sequence {
    pub const ALL: [Sequence; 3] = [Sequence::Zero, Sequence::Positive, Sequence::Negative];
}

/// Network data in per-unit on `base_mva`. Buses are stored in id order and
/// ids are contiguous from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub base_mva: f64,
    pub nominal_hz: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

/// Branch count, generator count and load count of the layout the feature
/// vector and the 56-breaker allocation are built around.
pub const TABLE_BRANCHES: usize = 20;
pub const TABLE_GENERATORS: usize = 5;
pub const TABLE_LOADS: usize = 11;

impl NetworkModel {
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, id: usize) -> Result<usize, GridError> {
        if id >= 1 && id <= self.buses.len() {
            Ok(id - 1)
        } else {
            Err(GridError::UnknownBus(id))
        }
    }

    pub fn branch(&self, id: usize) -> Result<&Branch, GridError> {
        id.checked_sub(1)
            .and_then(|i| self.branches.get(i))
            .ok_or(GridError::UnknownBranch(id))
    }

    pub fn slack_bus(&self) -> Result<usize, GridError> {
        let mut slack = self.buses.iter().filter(|b| b.kind == BusKind::Slack);
        match (slack.next(), slack.next()) {
            (Some(b), None) => Ok(b.id),
            _ => Err(GridError::Invalid("exactly one slack bus required".into())),
        }
    }

    pub fn load_at(&self, bus: usize) -> Complex64 {
        self.loads.iter().filter(|l| l.bus == bus).map(|l| l.s).sum()
    }

    /// Scales every load by `factor`.
    pub fn with_load_scale(&self, factor: f64) -> NetworkModel {
        let mut net = self.clone();
        for load in &mut net.loads {
            load.s *= factor;
        }
        net
    }

    /// Structural checks every model must pass.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.buses.is_empty() {
            return Err(GridError::Invalid("no buses".into()));
        }
        for (i, bus) in self.buses.iter().enumerate() {
            if bus.id != i + 1 {
                return Err(GridError::Invalid(format!(
                    "bus ids must be contiguous from 1, found {} at position {}",
                    bus.id,
                    i + 1
                )));
            }
            if bus.base_kv <= 0.0 {
                return Err(GridError::Invalid(format!("bus {} base kV must be positive", bus.id)));
            }
        }
        self.slack_bus()?;
        for br in &self.branches {
            self.bus_index(br.from)?;
            self.bus_index(br.to)?;
            if br.from == br.to {
                return Err(GridError::Invalid(format!("branch {} is a self loop", br.id)));
            }
            if br.positive.z.norm() <= 0.0 || br.zero.z.norm() <= 0.0 {
                return Err(GridError::Invalid(format!(
                    "branch {} impedance magnitude must be positive",
                    br.id
                )));
            }
            if br.tap <= 0.0 {
                return Err(GridError::Invalid(format!("branch {} tap must be positive", br.id)));
            }
        }
        for g in &self.generators {
            self.bus_index(g.bus)?;
            if g.x1 <= 0.0 || g.x0 <= 0.0 {
                return Err(GridError::Invalid(format!(
                    "generator at bus {} needs positive sequence reactances",
                    g.bus
                )));
            }
        }
        for l in &self.loads {
            self.bus_index(l.bus)?;
        }
        let slack = self.slack_bus()?;
        let reached = self.reachable_from(slack, &BTreeSet::new());
        if reached.len() != self.buses.len() {
            let missing: Vec<usize> = (1..=self.buses.len()).filter(|b| !reached.contains(b)).collect();
            return Err(GridError::Islanded(missing));
        }
        Ok(())
    }

    /// Checks the 20 branch / 5 generator / 11 load layout behind the
    /// 56-breaker allocation.
    pub fn check_table_layout(&self) -> Result<(), GridError> {
        if self.branches.len() != TABLE_BRANCHES
            || self.generators.len() != TABLE_GENERATORS
            || self.loads.len() != TABLE_LOADS
        {
            return Err(GridError::Invalid(format!(
                "expected {TABLE_BRANCHES} branches, {TABLE_GENERATORS} generators, {TABLE_LOADS} loads; found {}, {}, {}",
                self.branches.len(),
                self.generators.len(),
                self.loads.len()
            )));
        }
        Ok(())
    }

    /// Buses reachable from `start` when the branches in `open` are removed.
    pub fn reachable_from(&self, start: usize, open: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(bus) = queue.pop_front() {
            for br in &self.branches {
                if open.contains(&br.id) {
                    continue;
                }
                let next = if br.from == bus {
                    br.to
                } else if br.to == bus {
                    br.from
                } else {
                    continue;
                };
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Branches incident to `bus`, in branch id order.
    pub fn incident_branches(&self, bus: usize) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(move |b| b.from == bus || b.to == bus)
    }

    /// Impedance base in ohms at a bus.
    pub fn z_base_ohm(&self, bus: usize) -> Result<f64, GridError> {
        let kv = self.buses[self.bus_index(bus)?].base_kv;
        Ok(kv * kv / self.base_mva)
    }
}
