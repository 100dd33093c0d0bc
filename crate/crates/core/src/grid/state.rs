use std::collections::BTreeSet;

use num_complex::Complex64;

use super::network::NetworkModel;
use super::sequence::to_seq;
use super::snapshot::SystemSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    From,
    To,
}

impl End {
    pub fn index(self) -> usize {
        match self {
            End::From => 0,
            End::To => 1,
        }
    }
}

/// A breaker position: one end of a branch, a generator or a load.
///
/// Terminals are numbered line ends first (branch-major, from end before to
/// end), then generators, then loads, each in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    Line { branch: usize, end: End },
    /// Index into `NetworkModel::generators`.
    Generator(usize),
    /// Index into `NetworkModel::loads`.
    Load(usize),
}

impl Terminal {
    pub fn bus(&self, net: &NetworkModel) -> usize {
        match *self {
            Terminal::Line { branch, end } => {
                let br = &net.branches[branch - 1];
                match end {
                    End::From => br.from,
                    End::To => br.to,
                }
            }
            Terminal::Generator(i) => net.generators[i].bus,
            Terminal::Load(i) => net.loads[i].bus,
        }
    }
}

impl NetworkModel {
    pub fn terminal_count(&self) -> usize {
        2 * self.branches.len() + self.generators.len() + self.loads.len()
    }

    pub fn terminals(&self) -> Vec<Terminal> {
        let mut out = Vec::with_capacity(self.terminal_count());
        for br in &self.branches {
            out.push(Terminal::Line { branch: br.id, end: End::From });
            out.push(Terminal::Line { branch: br.id, end: End::To });
        }
        out.extend((0..self.generators.len()).map(Terminal::Generator));
        out.extend((0..self.loads.len()).map(Terminal::Load));
        out
    }

    pub fn terminal_index(&self, t: Terminal) -> usize {
        match t {
            Terminal::Line { branch, end } => 2 * (branch - 1) + end.index(),
            Terminal::Generator(i) => 2 * self.branches.len() + i,
            Terminal::Load(i) => 2 * self.branches.len() + self.generators.len() + i,
        }
    }
}

/// Open breaker positions, by terminal index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpenSet(pub BTreeSet<usize>);

impl OpenSet {
    pub fn new() -> OpenSet {
        OpenSet::default()
    }

    /// Both ends of every listed branch.
    pub fn from_branches(net: &NetworkModel, branches: &BTreeSet<usize>) -> OpenSet {
        let mut set = BTreeSet::new();
        for &b in branches {
            set.insert(net.terminal_index(Terminal::Line { branch: b, end: End::From }));
            set.insert(net.terminal_index(Terminal::Line { branch: b, end: End::To }));
        }
        OpenSet(set)
    }

    pub fn is_open(&self, net: &NetworkModel, t: Terminal) -> bool {
        self.0.contains(&net.terminal_index(t))
    }

    /// A branch with either end open carries no current.
    pub fn branch_out(&self, net: &NetworkModel, branch: usize) -> bool {
        self.is_open(net, Terminal::Line { branch, end: End::From })
            || self.is_open(net, Terminal::Line { branch, end: End::To })
    }

    pub fn out_branches(&self, net: &NetworkModel) -> BTreeSet<usize> {
        net.branches
            .iter()
            .filter(|b| self.branch_out(net, b.id))
            .map(|b| b.id)
            .collect()
    }
}

/// Phase voltages at every bus and phase currents at every terminal.
/// Terminal currents are positive flowing from the bus into the element.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorState {
    pub voltages: Vec<[Complex64; 3]>,
    pub currents: Vec<[Complex64; 3]>,
    /// Phase currents into the fault, when one is applied.
    pub fault_current: Option<[Complex64; 3]>,
    /// Phase voltages at the fault point.
    pub fault_voltage: Option<[Complex64; 3]>,
}

impl PhasorState {
    pub fn snapshot(&self, hz: f64, time: f64) -> SystemSnapshot {
        SystemSnapshot::from_phase_voltages(&self.voltages, hz, time)
    }

    pub fn voltage_seq(&self, bus: usize) -> [Complex64; 3] {
        to_seq(self.voltages[bus - 1])
    }

    pub fn current(&self, net: &NetworkModel, t: Terminal) -> [Complex64; 3] {
        self.currents[net.terminal_index(t)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_ieee14;

    #[test]
    fn terminal_order_and_count() {
        let net = build_ieee14();
        let ts = net.terminals();
        assert_eq!(ts.len(), 56);
        for (i, t) in ts.iter().enumerate() {
            assert_eq!(net.terminal_index(*t), i);
        }
        assert_eq!(ts[27], Terminal::Line { branch: 14, end: End::To });
        assert_eq!(ts[40], Terminal::Generator(0));
        assert_eq!(ts[45], Terminal::Load(0));
        assert_eq!(ts[27].bus(&net), 8);
    }

    #[test]
    fn one_open_end_takes_the_branch_out() {
        let net = build_ieee14();
        let mut open = OpenSet::new();
        open.0.insert(net.terminal_index(Terminal::Line { branch: 13, end: End::To }));
        assert!(open.branch_out(&net, 13));
        assert!(!open.branch_out(&net, 12));
        assert_eq!(open.out_branches(&net), BTreeSet::from([13]));
    }
}
