//! Labelled graphs, node labels, identifier assignments and the graph file
//! formats.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turing::{Cell, MachineSpec, TuringMachine};

/// Instance-wide parameter block carried by every node of a construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Params {
    None,
    /// Constant cycle label `r` of the bounded-identifier promise problem.
    Cycle { r: u64 },
    /// Layered-tree gadgets.
    Tree { r: u32 },
    /// Execution-table gadgets.
    Table { machine: Arc<TuringMachine>, r: u32 },
    /// Cycle labelled with a machine (halting promise problem).
    Machine { machine: Arc<TuringMachine> },
}

impl Params {
    pub fn machine(&self) -> Option<&Arc<TuringMachine>> {
        match self {
            Params::Table { machine, .. } | Params::Machine { machine } => Some(machine),
            _ => None,
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Params::None => out.push(0),
            Params::Cycle { r } => {
                out.push(1);
                out.extend_from_slice(&r.to_be_bytes());
            }
            Params::Tree { r } => {
                out.push(2);
                out.extend_from_slice(&r.to_be_bytes());
            }
            Params::Table { machine, r } => {
                out.push(3);
                out.extend_from_slice(&r.to_be_bytes());
                out.extend_from_slice(&(machine.encoded().len() as u32).to_be_bytes());
                out.extend_from_slice(machine.encoded());
            }
            Params::Machine { machine } => {
                out.push(4);
                out.extend_from_slice(&(machine.encoded().len() as u32).to_be_bytes());
                out.extend_from_slice(machine.encoded());
            }
        }
    }
}

/// Role-specific part of a node label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "kebab-case")]
pub enum Role {
    TreeNode { x: u64, y: u32 },
    Pivot,
    TableCell(Cell),
    PyramidNode,
    CycleNode,
    Opaque { value: u64 },
}

impl Role {
    pub fn tag(&self) -> &'static str {
        match self {
            Role::TreeNode { .. } => "tree-node",
            Role::Pivot => "pivot",
            Role::TableCell(_) => "table-cell",
            Role::PyramidNode => "pyramid-node",
            Role::CycleNode => "cycle-node",
            Role::Opaque { .. } => "opaque",
        }
    }

    pub fn cell(&self) -> Option<Cell> {
        match self {
            Role::TableCell(c) => Some(*c),
            _ => None,
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        match *self {
            Role::TreeNode { x, y } => {
                out.push(0);
                out.extend_from_slice(&x.to_be_bytes());
                out.extend_from_slice(&y.to_be_bytes());
            }
            Role::Pivot => out.push(1),
            Role::TableCell(c) => {
                out.push(2);
                out.push(c.xm);
                out.push(c.ym);
                out.extend_from_slice(&c.symbol.to_be_bytes());
                match c.head {
                    None => out.push(0xff),
                    Some(h) => {
                        out.push(h.arrival.code());
                        out.extend_from_slice(&h.state.to_be_bytes());
                    }
                }
            }
            Role::PyramidNode => out.push(3),
            Role::CycleNode => out.push(4),
            Role::Opaque { value } => {
                out.push(5);
                out.extend_from_slice(&value.to_be_bytes());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeLabel {
    pub params: Params,
    pub role: Role,
}

impl NodeLabel {
    pub fn new(params: Params, role: Role) -> Self {
        NodeLabel { params, role }
    }

    pub fn opaque(value: u64) -> Self {
        NodeLabel { params: Params::None, role: Role::Opaque { value } }
    }

    /// Injective byte encoding used by canonical forms.
    pub fn encode(&self, out: &mut Vec<u8>) {
        self.params.encode(out);
        self.role.encode(out);
    }

    pub fn encoded(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.encode(&mut v);
        v
    }

    /// Whether the payload matches the parameter block's family.
    pub fn is_well_formed(&self) -> bool {
        matches!(
            (&self.params, &self.role),
            (_, Role::Opaque { .. })
                | (Params::Tree { .. }, Role::TreeNode { .. } | Role::Pivot)
                | (Params::Table { .. }, Role::TableCell(_) | Role::PyramidNode)
                | (Params::Cycle { .. } | Params::Machine { .. }, Role::CycleNode)
        )
    }
}

/// Read access to a (possibly implicit) labelled graph.
pub trait GraphView: Sync {
    fn node_count(&self) -> usize;
    fn label(&self, u: usize) -> NodeLabel;
    fn neighbours(&self, u: usize) -> Vec<usize>;

    fn degree(&self, u: usize) -> usize {
        self.neighbours(u).len()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbours(a).contains(&b)
    }

    fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|u| self.degree(u)).sum::<usize>() / 2
    }
}

/// Simple connected undirected graph with one label per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledGraph {
    labels: Vec<NodeLabel>,
    adj: Vec<Vec<u32>>,
}

impl LabelledGraph {
    /// Builds and validates: no self-loops, no parallel edges, connected.
    pub fn new(labels: Vec<NodeLabel>, edges: &[(usize, usize)]) -> Result<Self> {
        let g = Self::build(labels, edges)?;
        if !g.is_connected() {
            return Err(Error::Input("graph is not connected".into()));
        }
        Ok(g)
    }

    /// Like [`LabelledGraph::new`] but skips the connectivity check.
    pub fn new_unchecked(labels: Vec<NodeLabel>, edges: &[(usize, usize)]) -> Result<Self> {
        Self::build(labels, edges)
    }

    fn build(labels: Vec<NodeLabel>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Input("graph has no nodes".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Input("too many nodes".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at {u}")));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Input(format!("parallel edge at node {u}")));
            }
        }
        Ok(LabelledGraph { labels, adj })
    }

    /// Copies any view into an explicit graph.
    pub fn materialize(view: &dyn GraphView) -> Result<Self> {
        let n = view.node_count();
        if n as u64 > crate::error::node_cap() {
            return Err(Error::Resource { what: "nodes".into(), limit: crate::error::node_cap(), reached: n as u64 });
        }
        let labels = (0..n).map(|u| view.label(u)).collect();
        let adj = (0..n)
            .map(|u| {
                let mut l: Vec<u32> = view.neighbours(u).into_iter().map(|v| v as u32).collect();
                l.sort_unstable();
                l
            })
            .collect();
        Ok(LabelledGraph { labels, adj })
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn label_ref(&self, u: usize) -> &NodeLabel {
        &self.labels[u]
    }

    pub fn set_label(&mut self, u: usize, label: NodeLabel) {
        self.labels[u] = label;
    }

    pub fn adjacency(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v as usize {
                    out.push((u, v as usize));
                }
            }
        }
        out
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v || u >= self.adj.len() || v >= self.adj.len() {
            return Err(Error::Input(format!("cannot add edge ({u},{v})")));
        }
        match self.adj[u].binary_search(&(v as u32)) {
            Ok(_) => Err(Error::Input(format!("edge ({u},{v}) already present"))),
            Err(i) => {
                self.adj[u].insert(i, v as u32);
                let j = self.adj[v].binary_search(&(u as u32)).unwrap_err();
                self.adj[v].insert(j, u as u32);
                Ok(())
            }
        }
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<()> {
        match (self.adj[u].binary_search(&(v as u32)), self.adj[v].binary_search(&(u as u32))) {
            (Ok(i), Ok(j)) => {
                self.adj[u].remove(i);
                self.adj[v].remove(j);
                Ok(())
            }
            _ => Err(Error::Input(format!("edge ({u},{v}) not present"))),
        }
    }

    pub fn is_connected(&self) -> bool {
        let dist = bfs_distances(self, 0, usize::MAX);
        dist.iter().all(|d| d.is_some())
    }

    /// Uniform parameter block, if every node carries the same one.
    pub fn common_params(&self) -> Option<&Params> {
        let first = &self.labels[0].params;
        self.labels.iter().all(|l| &l.params == first).then_some(first)
    }

    pub fn to_json(&self) -> GraphFile {
        let common = self.common_params().cloned().unwrap_or(Params::None);
        let nodes = self
            .labels
            .iter()
            .enumerate()
            .map(|(id, l)| NodeEntry {
                id,
                label: LabelFile {
                    role: l.role,
                    params: (l.params != common).then(|| ParamsFile::from(&l.params)),
                },
            })
            .collect();
        GraphFile { nodes, edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(), params: ParamsFile::from(&common) }
    }

    pub fn from_json(file: &GraphFile) -> Result<Self> {
        let common = file.params.to_params()?;
        let n = file.nodes.len();
        let mut labels: Vec<Option<NodeLabel>> = vec![None; n];
        for entry in &file.nodes {
            if entry.id >= n || labels[entry.id].is_some() {
                return Err(Error::Input(format!("bad or duplicate node id {}", entry.id)));
            }
            let params = match &entry.label.params {
                Some(p) => p.to_params()?,
                None => common.clone(),
            };
            labels[entry.id] = Some(NodeLabel { params, role: entry.label.role });
        }
        let labels = labels.into_iter().map(|l| l.unwrap()).collect();
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        LabelledGraph::new(labels, &edges)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("graph serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    /// Graphviz rendering; table cells are shown with their content.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n  node [shape=box, fontsize=10];\n");
        for (u, l) in self.labels.iter().enumerate() {
            let text = match l.role {
                Role::TreeNode { x, y } => format!("({x},{y})"),
                Role::Pivot => "pivot".to_string(),
                Role::TableCell(c) => {
                    let head = match (c.head, l.params.machine()) {
                        (Some(h), Some(m)) => format!(" {}:{:?}", m.state_name(h.state), h.arrival),
                        (Some(h), None) => format!(" q{}:{:?}", h.state, h.arrival),
                        _ => String::new(),
                    };
                    let sym = l.params.machine().map_or(c.symbol.to_string(), |m| m.symbol_name(c.symbol).to_string());
                    format!("{}{} [{}]{}", c.xm, c.ym, sym, head)
                }
                Role::PyramidNode => "^".to_string(),
                Role::CycleNode => "o".to_string(),
                Role::Opaque { value } => value.to_string(),
            };
            let shape = match l.role {
                Role::PyramidNode => ", shape=point",
                Role::Pivot => ", shape=circle, style=filled",
                _ => "",
            };
            let _ = writeln!(s, "  n{u} [label=\"{}\"{shape}];", text.replace('"', "'"));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(s, "  n{u} -- n{v};");
        }
        s.push_str("}\n");
        s
    }
}

impl GraphView for LabelledGraph {
    fn node_count(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, u: usize) -> NodeLabel {
        self.labels[u].clone()
    }

    fn neighbours(&self, u: usize) -> Vec<usize> {
        self.adj[u].iter().map(|&v| v as usize).collect()
    }

    fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// BFS distances from `source`, cut off after `limit` hops.
pub fn bfs_distances(g: &dyn GraphView, source: usize, limit: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        if d >= limit {
            continue;
        }
        for v in g.neighbours(u) {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Serialized graph: `{ "nodes": [{ "id", "label" }], "edges": [[u,v]], "params": {...} }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<[usize; 2]>,
    pub params: ParamsFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: usize,
    pub label: LabelFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabelFile {
    #[serde(flatten)]
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParamsFile {
    None,
    Cycle { r: u64 },
    Tree { r: u32 },
    Table { machine: MachineSpec, r: u32 },
    Machine { machine: MachineSpec },
}

impl From<&Params> for ParamsFile {
    fn from(p: &Params) -> Self {
        match p {
            Params::None => ParamsFile::None,
            Params::Cycle { r } => ParamsFile::Cycle { r: *r },
            Params::Tree { r } => ParamsFile::Tree { r: *r },
            Params::Table { machine, r } => ParamsFile::Table { machine: machine.to_spec(), r: *r },
            Params::Machine { machine } => ParamsFile::Machine { machine: machine.to_spec() },
        }
    }
}

impl ParamsFile {
    pub fn to_params(&self) -> Result<Params> {
        Ok(match self {
            ParamsFile::None => Params::None,
            ParamsFile::Cycle { r } => Params::Cycle { r: *r },
            ParamsFile::Tree { r } => Params::Tree { r: *r },
            ParamsFile::Table { machine, r } => {
                Params::Table { machine: Arc::new(TuringMachine::from_spec(machine)?), r: *r }
            }
            ParamsFile::Machine { machine } => Params::Machine { machine: Arc::new(TuringMachine::from_spec(machine)?) },
        })
    }
}

/// Nondecreasing identifier bound `f` with `f(n) >= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundFunction {
    /// f(n) = n
    Linear,
    /// f(n) = 2n
    Double,
    /// f(n) = n^2
    Square,
    /// f(n) = 2^n
    Exponential,
}

impl BoundFunction {
    pub const ALL: [BoundFunction; 4] =
        [BoundFunction::Linear, BoundFunction::Double, BoundFunction::Square, BoundFunction::Exponential];

    pub fn eval(self, n: u64) -> BigUint {
        let n_big = BigUint::from(n);
        match self {
            BoundFunction::Linear => n_big,
            BoundFunction::Double => n_big * 2u32,
            BoundFunction::Square => &n_big * &n_big,
            BoundFunction::Exponential => BigUint::one() << n,
        }
    }

    /// `f(n)` as a machine word, if it fits.
    pub fn eval_u64(self, n: u64) -> Option<u64> {
        self.eval(n).to_u64()
    }

    /// Smallest `j` with `f(j) >= i`.
    pub fn inverse(self, i: &BigUint) -> u64 {
        if i.is_zero() {
            return 0;
        }
        // exponential search then bisection; f is nondecreasing
        let mut hi = 1u64;
        while self.eval(hi) < *i {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) >= *i {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundFunction::Linear => "n",
            BoundFunction::Double => "2n",
            BoundFunction::Square => "n^2",
            BoundFunction::Exponential => "2^n",
        }
    }
}

impl fmt::Display for BoundFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace(' ', "").as_str() {
            "n" | "linear" => Ok(BoundFunction::Linear),
            "2n" | "2*n" | "double" => Ok(BoundFunction::Double),
            "n^2" | "n2" | "n*n" | "square" => Ok(BoundFunction::Square),
            "2^n" | "exp" | "exponential" => Ok(BoundFunction::Exponential),
            other => Err(Error::Input(format!("unknown bound function `{other}`"))),
        }
    }
}

/// Injective node -> natural map, optionally declared bounded by `f(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdAssignment {
    ids: Vec<BigUint>,
    bound: Option<BoundFunction>,
}

impl IdAssignment {
    pub fn new(ids: Vec<BigUint>, bound: Option<BoundFunction>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id) {
                return Err(Error::Input(format!("identifier {id} assigned twice")));
            }
        }
        let a = IdAssignment { ids, bound };
        if let Some(f) = bound {
            a.check_bound(f)?;
        }
        Ok(a)
    }

    pub fn from_u64(ids: &[u64]) -> Result<Self> {
        Self::new(ids.iter().map(|&i| BigUint::from(i)).collect(), None)
    }

    /// Identity assignment `v -> v`.
    pub fn sequential(n: usize) -> Self {
        IdAssignment { ids: (0..n as u64).map(BigUint::from).collect(), bound: None }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, v: usize) -> &BigUint {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[BigUint] {
        &self.ids
    }

    pub fn bound(&self) -> Option<BoundFunction> {
        self.bound
    }

    pub fn check_bound(&self, f: BoundFunction) -> Result<()> {
        let limit = f.eval(self.ids.len() as u64);
        match self.ids.iter().position(|id| *id >= limit) {
            Some(v) => Err(Error::Input(format!(
                "identifier {} of node {v} is not below f(n) = {limit}",
                self.ids[v]
            ))),
            None => Ok(()),
        }
    }
}

/// Uniformly random injective assignment into `[0, f(n))`.
pub fn random_id_assignment(n: usize, f: BoundFunction, seed: u64) -> Result<IdAssignment> {
    let limit = f.eval(n as u64);
    if limit < BigUint::from(n) {
        return Err(Error::Infeasible(format!("f({n}) = {limit} < {n}: no injective bounded assignment")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = match limit.to_usize() {
        Some(l) if l <= 4 * n.max(1) + 64 => rand::seq::index::sample(&mut rng, l, n)
            .into_iter()
            .map(BigUint::from)
            .collect(),
        _ => {
            let mut seen = HashSet::with_capacity(n);
            let mut ids = Vec::with_capacity(n);
            while ids.len() < n {
                let x = rng.gen_biguint_below(&limit);
                if seen.insert(x.clone()) {
                    ids.push(x);
                }
            }
            ids
        }
    };
    Ok(IdAssignment { ids, bound: Some(f) })
}

/// Small graph builders used across tests, examples and the CLI.
pub mod builders {
    use super::*;

    pub fn cycle(n: usize, label: NodeLabel) -> LabelledGraph {
        assert!(n >= 3);
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        LabelledGraph::new(vec![label; n], &edges).unwrap()
    }

    pub fn path(n: usize, label: NodeLabel) -> LabelledGraph {
        assert!(n >= 1);
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        LabelledGraph::new(vec![label; n], &edges).unwrap()
    }

    pub fn opaque(labels: &[u64], edges: &[(usize, usize)]) -> Result<LabelledGraph> {
        LabelledGraph::new(labels.iter().map(|&v| NodeLabel::opaque(v)).collect(), edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_graphs() {
        let l = || vec![NodeLabel::opaque(0); 3];
        assert!(LabelledGraph::new(l(), &[(0, 0), (1, 2)]).is_err());
        assert!(LabelledGraph::new(l(), &[(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(LabelledGraph::new(l(), &[(0, 1)]).is_err());
        assert!(LabelledGraph::new(l(), &[(0, 5)]).is_err());
        assert!(LabelledGraph::new(l(), &[(0, 1), (1, 2)]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let m = Arc::new(crate::turing::fixtures::busy_beaver2());
        let p = Params::Table { machine: m.clone(), r: 1 };
        let cell = crate::turing::Cell { xm: 1, ym: 2, symbol: 1, head: None };
        let labels = vec![
            NodeLabel::new(p.clone(), Role::TableCell(cell)),
            NodeLabel::new(p.clone(), Role::PyramidNode),
            NodeLabel::new(Params::Tree { r: 3 }, Role::TreeNode { x: 5, y: 3 }),
        ];
        let g = LabelledGraph::new(labels, &[(0, 1), (1, 2)]).unwrap();
        let text = g.to_json_string();
        assert_eq!(LabelledGraph::from_json_str(&text).unwrap(), g);
        assert!(g.to_dot().contains("n0 -- n1"));
    }

    #[test]
    fn id_assignment_basics() {
        assert!(IdAssignment::from_u64(&[1, 2, 1]).is_err());
        let one = random_id_assignment(1, BoundFunction::Linear, 7).unwrap();
        assert_eq!(one.ids(), &[BigUint::zero()]);
        let a = random_id_assignment(5, BoundFunction::Linear, 3).unwrap();
        let mut ids: Vec<u64> = a.ids().iter().map(|i| i.to_u64().unwrap()).collect();
        ids.sort();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        assert_eq!(random_id_assignment(50, BoundFunction::Square, 9).unwrap(), random_id_assignment(50, BoundFunction::Square, 9).unwrap());
        let big = random_id_assignment(40, BoundFunction::Exponential, 1).unwrap();
        big.check_bound(BoundFunction::Exponential).unwrap();
        assert!(IdAssignment::new(vec![BigUint::from(5u32)], Some(BoundFunction::Linear)).is_err());
    }

    #[test]
    fn bound_inverse_brackets() {
        for f in BoundFunction::ALL {
            for i in 1u64..300 {
                let i = BigUint::from(i);
                let j = f.inverse(&i);
                assert!(f.eval(j) >= i);
                assert!(j == 0 || f.eval(j - 1) < i);
            }
        }
        assert_eq!(BoundFunction::Double.inverse(&BigUint::from(7u32)), 4);
        assert_eq!("n^2".parse::<BoundFunction>().unwrap(), BoundFunction::Square);
        assert!("n^3".parse::<BoundFunction>().is_err());
    }
}
