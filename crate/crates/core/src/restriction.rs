//! Architecture restrictions: predicates a gate must satisfy to appear in a
//! synthesized circuit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::cost::CouplingMap;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Restriction {
    #[default]
    Unrestricted,
    /// The operand lines of every gate induce a connected subgraph of the
    /// given graph (nodes are lines).
    AdjacentLinesOnly(CouplingMap),
    AllowedKinds(BTreeSet<GateKind>),
    /// Lines a gate of the given kind may write; kinds absent from the map
    /// are unconstrained. Masks use bit `i - 1` for line `i`.
    TargetLines(BTreeMap<GateKind, u64>),
    All(Vec<Restriction>),
}

impl Restriction {
    /// Adjacency along the path `1 - 2 - ... - lines`.
    pub fn nearest_neighbor(lines: usize) -> Restriction {
        Restriction::AdjacentLinesOnly(CouplingMap::path(lines).expect("valid path graph"))
    }

    pub fn allowed_kinds(kinds: impl IntoIterator<Item = GateKind>) -> Restriction {
        Restriction::AllowedKinds(kinds.into_iter().collect())
    }

    pub fn target_lines(kind: GateKind, lines: impl IntoIterator<Item = u8>) -> Restriction {
        let mask = lines.into_iter().fold(0u64, |m, l| m | 1 << (l - 1));
        Restriction::TargetLines(BTreeMap::from([(kind, mask)]))
    }

    pub fn and(self, other: Restriction) -> Restriction {
        match (self, other) {
            (Restriction::Unrestricted, r) | (r, Restriction::Unrestricted) => r,
            (Restriction::All(mut a), Restriction::All(b)) => {
                a.extend(b);
                Restriction::All(a)
            }
            (Restriction::All(mut a), r) | (r, Restriction::All(mut a)) => {
                a.push(r);
                Restriction::All(a)
            }
            (a, b) => Restriction::All(vec![a, b]),
        }
    }

    pub fn kind_allowed(&self, kind: GateKind) -> bool {
        match self {
            Restriction::AllowedKinds(set) => set.contains(&kind),
            Restriction::All(rs) => rs.iter().all(|r| r.kind_allowed(kind)),
            _ => true,
        }
    }

    /// Whether `gate` satisfies the restriction. Only operand slots are
    /// inspected.
    pub fn admits(&self, gate: &Gate) -> bool {
        match self {
            Restriction::Unrestricted => true,
            Restriction::AllowedKinds(set) => set.contains(&gate.kind),
            Restriction::AdjacentLinesOnly(graph) => connected_operands(graph, gate),
            Restriction::TargetLines(map) => match map.get(&gate.kind) {
                Some(&mask) => gate.write_mask() & !mask == 0,
                None => true,
            },
            Restriction::All(rs) => rs.iter().all(|r| r.admits(gate)),
        }
    }

    pub fn admits_circuit(&self, circuit: &Circuit) -> bool {
        circuit.gates().iter().all(|g| self.admits(g))
    }
}

fn connected_operands(graph: &CouplingMap, gate: &Gate) -> bool {
    let ops = gate.operands();
    if ops.iter().any(|&a| a as usize > graph.qubits()) {
        return false;
    }
    match *ops {
        [] | [_] => true,
        [a, b] => graph.adjacent(a, b),
        [a, b, c] => {
            let edges = graph.adjacent(a, b) as u8 + graph.adjacent(b, c) as u8 + graph.adjacent(a, c) as u8;
            edges >= 2
        }
        _ => unreachable!("arity is at most three"),
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::Unrestricted => f.write_str("unrestricted"),
            Restriction::AdjacentLinesOnly(g) => write!(f, "adjacent({})", g.name()),
            Restriction::AllowedKinds(set) => {
                let names: Vec<_> = set.iter().map(|k| k.keyword()).collect();
                write!(f, "kinds({})", names.join(","))
            }
            Restriction::TargetLines(map) => {
                let parts: Vec<String> = map
                    .iter()
                    .map(|(k, mask)| {
                        let lines: Vec<String> = (1..=64)
                            .filter(|i| (mask >> (i - 1)) & 1 == 1)
                            .map(|i| i.to_string())
                            .collect();
                        format!("{}:{}", k.keyword(), lines.join("/"))
                    })
                    .collect();
                write!(f, "targets({})", parts.join(","))
            }
            Restriction::All(rs) => {
                let parts: Vec<String> = rs.iter().map(|r| r.to_string()).collect();
                write!(f, "{}", parts.join(" & "))
            }
        }
    }
}
