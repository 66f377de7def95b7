//! Quantum cost, primitive-gate decomposition with SWAP routing, and the
//! coupling-aware circuit cost.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, MAX_LINES};
use crate::error::{parse_err, Error, Result};

/// Weight of a two-qubit primitive in the circuit cost.
pub const TWO_QUBIT_WEIGHT: u64 = 10;

/// Per-kind quantum cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTable {
    pub identity: u64,
    pub not: u64,
    pub cnot: u64,
    pub swap: u64,
    pub toffoli: u64,
    pub fredkin: u64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            identity: 0,
            not: 1,
            cnot: 1,
            swap: 3,
            toffoli: 5,
            fredkin: 5,
        }
    }
}

impl CostTable {
    pub fn get(&self, kind: GateKind) -> u64 {
        match kind {
            GateKind::Identity => self.identity,
            GateKind::Not => self.not,
            GateKind::Cnot => self.cnot,
            GateKind::Swap => self.swap,
            GateKind::Toffoli => self.toffoli,
            GateKind::Fredkin => self.fredkin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.identity != 0 {
            return Err(Error::InvalidParams("identity gates must cost 0".into()));
        }
        Ok(())
    }
}

pub fn quantum_cost(circuit: &Circuit, table: &CostTable) -> u64 {
    circuit.gates().iter().map(|g| table.get(g.kind)).sum()
}

/// Undirected hardware connectivity over qubits `1..=qubits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    name: String,
    qubits: usize,
    /// `adjacency[q - 1]` has bit `p - 1` set iff `q`–`p` is an edge.
    adjacency: Vec<u64>,
}

impl CouplingMap {
    pub fn new(name: impl Into<String>, qubits: usize, edges: &[(u8, u8)]) -> Result<CouplingMap> {
        if qubits == 0 || qubits > MAX_LINES {
            return Err(Error::Coupling(format!("qubit count {qubits} outside 1..=64")));
        }
        let mut adjacency = vec![0u64; qubits];
        for &(a, b) in edges {
            let (ai, bi) = (a as usize, b as usize);
            if ai == 0 || bi == 0 || ai > qubits || bi > qubits || a == b {
                return Err(Error::Coupling(format!("invalid edge {a}-{b}")));
            }
            adjacency[ai - 1] |= 1 << (bi - 1);
            adjacency[bi - 1] |= 1 << (ai - 1);
        }
        let map = CouplingMap {
            name: name.into(),
            qubits,
            adjacency,
        };
        let reach = map.bfs(1).0.iter().filter(|d| d.is_some()).count();
        if reach != qubits {
            return Err(Error::Coupling("graph is not connected".into()));
        }
        Ok(map)
    }

    /// Path `1 - 2 - ... - k`.
    pub fn path(k: usize) -> Result<CouplingMap> {
        let edges: Vec<(u8, u8)> = (1..k as u8).map(|i| (i, i + 1)).collect();
        CouplingMap::new(format!("path{k}"), k, &edges)
    }

    /// Every pair adjacent.
    pub fn complete(k: usize) -> Result<CouplingMap> {
        let mut edges = Vec::new();
        for a in 1..=k as u8 {
            for b in a + 1..=k as u8 {
                edges.push((a, b));
            }
        }
        CouplingMap::new(format!("complete{k}"), k, &edges)
    }

    /// The bundled 15-qubit ladder.
    pub fn melbourne() -> CouplingMap {
        CouplingMap::parse("melbourne_ladder", include_str!("../data/melbourne_ladder.cmap"))
            .expect("bundled coupling map is valid")
    }

    /// Parses `qubits <k>` followed by `edge <a> <b>` lines.
    pub fn parse(name: &str, text: &str) -> Result<CouplingMap> {
        let mut qubits = None;
        let mut edges = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let no = no + 1;
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["qubits", k] => {
                    qubits = Some(k.parse::<usize>().map_err(|_| parse_err(no, "invalid qubit count"))?)
                }
                ["edge", a, b] => {
                    let a = a.parse::<u8>().map_err(|_| parse_err(no, "invalid qubit"))?;
                    let b = b.parse::<u8>().map_err(|_| parse_err(no, "invalid qubit"))?;
                    edges.push((a, b));
                }
                _ => return Err(parse_err(no, format!("unrecognized line `{line}`"))),
            }
        }
        let qubits = qubits.ok_or_else(|| parse_err(1, "missing `qubits <k>` header"))?;
        CouplingMap::new(name, qubits, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubits);
        for (a, b) in self.edges() {
            out.push_str(&format!("edge {a} {b}\n"));
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn edges(&self) -> BTreeSet<(u8, u8)> {
        let mut set = BTreeSet::new();
        for a in 1..=self.qubits {
            for b in a + 1..=self.qubits {
                if self.adjacent(a as u8, b as u8) {
                    set.insert((a as u8, b as u8));
                }
            }
        }
        set
    }

    pub fn adjacent(&self, a: u8, b: u8) -> bool {
        (self.adjacency[a as usize - 1] >> (b - 1)) & 1 == 1
    }

    fn neighbors(&self, q: u8) -> impl Iterator<Item = u8> + '_ {
        let mask = self.adjacency[q as usize - 1];
        (1..=self.qubits as u8).filter(move |&p| (mask >> (p - 1)) & 1 == 1)
    }

    /// BFS distances and predecessors from `src`, exploring neighbours in
    /// ascending order.
    fn bfs(&self, src: u8) -> (Vec<Option<usize>>, Vec<u8>) {
        let mut dist = vec![None; self.qubits];
        let mut pred = vec![0u8; self.qubits];
        dist[src as usize - 1] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(q) = queue.pop_front() {
            let d = dist[q as usize - 1].expect("queued nodes have distances");
            for p in self.neighbors(q) {
                if dist[p as usize - 1].is_none() {
                    dist[p as usize - 1] = Some(d + 1);
                    pred[p as usize - 1] = q;
                    queue.push_back(p);
                }
            }
        }
        (dist, pred)
    }

    pub fn distance(&self, a: u8, b: u8) -> usize {
        self.bfs(a).0[b as usize - 1].expect("map is connected")
    }

    /// A shortest path `a, ..., b`; ties go to the lowest-index predecessor.
    pub fn shortest_path(&self, a: u8, b: u8) -> Vec<u8> {
        let (_, pred) = self.bfs(a);
        let mut path = vec![b];
        let mut q = b;
        while q != a {
            q = pred[q as usize - 1];
            path.push(q);
        }
        path.reverse();
        path
    }
}

/// Line-to-qubit assignment; `placement[i - 1]` is the qubit of line `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement(Vec<u8>);

impl Placement {
    pub fn identity(lines: usize) -> Placement {
        Placement((1..=lines as u8).collect())
    }

    pub fn new(qubits: Vec<u8>, coupling: &CouplingMap) -> Result<Placement> {
        let mut seen = 0u64;
        for &q in &qubits {
            if q == 0 || q as usize > coupling.qubits() || seen & (1 << (q - 1)) != 0 {
                return Err(Error::Coupling(format!("invalid placement {qubits:?}")));
            }
            seen |= 1 << (q - 1);
        }
        Ok(Placement(qubits))
    }

    pub fn qubit(&self, line: u8) -> u8 {
        self.0[line as usize - 1]
    }

    pub fn lines(&self) -> usize {
        self.0.len()
    }

    /// Maps packed line bits onto packed qubit bits.
    pub fn lines_to_qubits(&self, bits: u64) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &q)| acc | (((bits >> i) & 1) << (q - 1)))
    }

    pub fn qubits_to_lines(&self, bits: u64) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &q)| acc | (((bits >> (q - 1)) & 1) << i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimKind {
    X,
    H,
    T,
    Tdg,
    Cx,
}

/// One step of a primitive circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// A hardware gate. `classical` is false for gates whose effect on basis
    /// states is accounted for by a later [`Step::Toffoli`] marker.
    Gate {
        kind: PrimKind,
        qubits: [u8; 2],
        classical: bool,
    },
    /// Zero-cost marker carrying the classical action of a decomposed Toffoli.
    Toffoli { controls: [u8; 2], target: u8 },
}

impl Step {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Step::Gate { kind: PrimKind::Cx, .. })
    }

    pub fn is_one_qubit(&self) -> bool {
        matches!(self, Step::Gate { kind, .. } if *kind != PrimKind::Cx)
    }

    /// Mask of qubits the step occupies (empty for markers).
    #[inline]
    pub fn qubit_mask(&self) -> u64 {
        match *self {
            Step::Gate {
                kind: PrimKind::Cx,
                qubits: [a, b],
                ..
            } => (1 << (a - 1)) | (1 << (b - 1)),
            Step::Gate { qubits: [a, _], .. } => 1 << (a - 1),
            Step::Toffoli { .. } => 0,
        }
    }

    /// Classical action on packed qubit bits.
    #[inline(always)]
    pub fn apply_bits(&self, s: u64) -> u64 {
        match *self {
            Step::Gate {
                classical: false, ..
            } => s,
            Step::Gate {
                kind: PrimKind::X,
                qubits: [a, _],
                ..
            } => s ^ (1 << (a - 1)),
            Step::Gate {
                kind: PrimKind::Cx,
                qubits: [c, t],
                ..
            } => s ^ (((s >> (c - 1)) & 1) << (t - 1)),
            Step::Gate { .. } => s,
            Step::Toffoli {
                controls: [a, b],
                target,
            } => s ^ (((s >> (a - 1)) & (s >> (b - 1)) & 1) << (target - 1)),
        }
    }
}

/// Hardware-level circuit over the qubits of a coupling map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveCircuit {
    pub qubits: usize,
    pub steps: Vec<Step>,
}

impl PrimitiveCircuit {
    pub fn one_qubit_count(&self) -> u64 {
        self.steps.iter().filter(|s| s.is_one_qubit()).count() as u64
    }

    pub fn two_qubit_count(&self) -> u64 {
        self.steps.iter().filter(|s| s.is_two_qubit()).count() as u64
    }

    pub fn gate_count(&self) -> u64 {
        self.one_qubit_count() + self.two_qubit_count()
    }

    pub fn circuit_cost(&self) -> u64 {
        self.one_qubit_count() + TWO_QUBIT_WEIGHT * self.two_qubit_count()
    }

    pub fn run_bits(&self, mut s: u64) -> u64 {
        for step in &self.steps {
            s = step.apply_bits(s);
        }
        s
    }
}

struct Emitter<'a> {
    coupling: &'a CouplingMap,
    steps: Vec<Step>,
}

impl Emitter<'_> {
    fn one(&mut self, kind: PrimKind, q: u8, classical: bool) {
        self.steps.push(Step::Gate {
            kind,
            qubits: [q, 0],
            classical,
        });
    }

    fn adjacent_cx(&mut self, c: u8, t: u8, classical: bool) {
        debug_assert!(self.coupling.adjacent(c, t));
        self.steps.push(Step::Gate {
            kind: PrimKind::Cx,
            qubits: [c, t],
            classical,
        });
    }

    fn adjacent_swap(&mut self, a: u8, b: u8) {
        self.adjacent_cx(a, b, true);
        self.adjacent_cx(b, a, true);
        self.adjacent_cx(a, b, true);
    }

    /// CX with SWAP chains moving the control next to the target and back.
    fn cx(&mut self, c: u8, t: u8, classical: bool) {
        if self.coupling.adjacent(c, t) {
            self.adjacent_cx(c, t, classical);
            return;
        }
        let path = self.coupling.shortest_path(c, t);
        let hops = path.len() - 2;
        for i in 0..hops {
            self.adjacent_swap(path[i], path[i + 1]);
        }
        self.adjacent_cx(path[hops], t, classical);
        for i in (0..hops).rev() {
            self.adjacent_swap(path[i], path[i + 1]);
        }
    }

    fn toffoli(&mut self, c1: u8, c2: u8, t: u8) {
        use PrimKind::{Tdg, H, T};
        self.one(H, t, false);
        self.cx(c2, t, false);
        self.one(Tdg, t, false);
        self.cx(c1, t, false);
        self.one(T, t, false);
        self.cx(c2, t, false);
        self.one(Tdg, t, false);
        self.cx(c1, t, false);
        self.one(T, c2, false);
        self.one(T, t, false);
        self.one(H, t, false);
        self.cx(c1, c2, false);
        self.one(T, c1, false);
        self.one(Tdg, c2, false);
        self.cx(c1, c2, false);
        self.steps.push(Step::Toffoli {
            controls: [c1, c2],
            target: t,
        });
    }
}

/// Lowers a circuit to `{X, H, T, T†, CX}` on `coupling`, routing every
/// non-adjacent CX with SWAP chains along a shortest path.
pub fn decompose(
    circuit: &Circuit,
    coupling: &CouplingMap,
    placement: &Placement,
) -> Result<PrimitiveCircuit> {
    if circuit.lines() > coupling.qubits() {
        return Err(Error::Coupling(format!(
            "{}-line circuit does not fit a {}-qubit map",
            circuit.lines(),
            coupling.qubits()
        )));
    }
    if placement.lines() != circuit.lines() {
        return Err(Error::Coupling(format!(
            "placement covers {} lines, circuit has {}",
            placement.lines(),
            circuit.lines()
        )));
    }
    let mut em = Emitter {
        coupling,
        steps: Vec::new(),
    };
    for g in circuit.gates() {
        let q = |slot: usize| placement.qubit(g.args[slot]);
        match g.kind {
            GateKind::Identity => {}
            GateKind::Not => em.one(PrimKind::X, q(0), true),
            GateKind::Cnot => em.cx(q(0), q(1), true),
            GateKind::Swap => {
                em.cx(q(0), q(1), true);
                em.cx(q(1), q(0), true);
                em.cx(q(0), q(1), true);
            }
            GateKind::Toffoli => em.toffoli(q(0), q(1), q(2)),
            GateKind::Fredkin => {
                em.cx(q(2), q(1), true);
                em.toffoli(q(0), q(1), q(2));
                em.cx(q(2), q(1), true);
            }
        }
    }
    Ok(PrimitiveCircuit {
        qubits: coupling.qubits(),
        steps: em.steps,
    })
}

/// `(# one-qubit primitives) + 10 (# two-qubit primitives)` after routing.
pub fn circuit_cost(circuit: &Circuit, coupling: &CouplingMap, placement: &Placement) -> Result<u64> {
    Ok(decompose(circuit, coupling, placement)?.circuit_cost())
}

/// Costs of one circuit together with the table and map that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub qc: u64,
    pub cc: Option<u64>,
    pub one_qubit: Option<u64>,
    pub two_qubit: Option<u64>,
    pub table: CostTable,
    pub coupling: String,
}

/// qc always; cc and primitive counts when the circuit fits the map.
pub fn cost_report(circuit: &Circuit, table: &CostTable, coupling: &CouplingMap) -> CostReport {
    let prim = decompose(circuit, coupling, &Placement::identity(circuit.lines())).ok();
    CostReport {
        qc: quantum_cost(circuit, table),
        cc: prim.as_ref().map(|p| p.circuit_cost()),
        one_qubit: prim.as_ref().map(|p| p.one_qubit_count()),
        two_qubit: prim.as_ref().map(|p| p.two_qubit_count()),
        table: *table,
        coupling: coupling.name().to_owned(),
    }
}
