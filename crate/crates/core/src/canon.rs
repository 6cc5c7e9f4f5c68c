//! Canonical forms of rooted labelled balls.
//!
//! Colour refinement seeded by (root, distance, label, degree), then
//! individualization with backtracking. Twin vertices and automorphisms
//! found along the way prune the search tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::graph::{GraphView, IdAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassMode {
    WithIds,
    Oblivious,
}

/// Canonical byte string of a rooted labelled ball.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeighbourhoodClass {
    mode: ClassMode,
    bytes: Vec<u8>,
}

impl NeighbourhoodClass {
    pub fn mode(&self) -> ClassMode {
        self.mode
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Input(format!("bad class string: {e}")))?;
        let mode = match bytes.first() {
            Some(0) => ClassMode::Oblivious,
            Some(1) => ClassMode::WithIds,
            _ => return Err(Error::Input("bad class header".into())),
        };
        Ok(NeighbourhoodClass { mode, bytes })
    }

    /// Number of nodes in the ball this class describes.
    pub fn node_count(&self) -> usize {
        u32::from_be_bytes(self.bytes[1..5].try_into().unwrap()) as usize
    }
}

impl fmt::Debug for NeighbourhoodClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.to_hex();
        if h.len() > 40 {
            write!(f, "Class({}..{}, {} bytes)", &h[..16], &h[h.len() - 8..], self.bytes.len())
        } else {
            write!(f, "Class({h})")
        }
    }
}

impl Serialize for NeighbourhoodClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for NeighbourhoodClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        NeighbourhoodClass::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

const LEAF_LIMIT: usize = 1 << 22;

struct Search<'a> {
    n: usize,
    adj: &'a [Vec<usize>],
    label_idx: &'a [u32],
    first: Option<(Vec<u32>, Vec<usize>, Vec<usize>)>,
    best: Option<(Vec<u32>, Vec<usize>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
    leaves: usize,
}

impl Search<'_> {
    /// Refines `colour` to the coarsest equitable partition below it.
    fn refine(&self, colour: &mut Vec<u32>) {
        let n = self.n;
        let mut cells = count_distinct(colour);
        loop {
            let keys: Vec<(u32, Vec<u32>)> = (0..n)
                .map(|i| {
                    let mut nb: Vec<u32> = self.adj[i].iter().map(|&j| colour[j]).collect();
                    nb.sort_unstable();
                    (colour[i], nb)
                })
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
            let mut next = vec![0u32; n];
            let mut rank = 0u32;
            for w in 0..n {
                if w > 0 && keys[order[w]] != keys[order[w - 1]] {
                    rank += 1;
                }
                next[order[w]] = rank;
            }
            let new_cells = rank as usize + 1;
            *colour = next;
            if new_cells == cells {
                return;
            }
            cells = new_cells;
        }
    }

    fn certificate(&self, colour: &[u32]) -> (Vec<u32>, Vec<usize>) {
        // discrete: colour[i] is i's position
        let mut at = vec![0usize; self.n];
        for (i, &c) in colour.iter().enumerate() {
            at[c as usize] = i;
        }
        let mut cert = Vec::with_capacity(self.n * 4);
        for &v in &at {
            cert.push(self.label_idx[v]);
            let mut nb: Vec<u32> = self.adj[v].iter().map(|&j| colour[j]).collect();
            nb.sort_unstable();
            cert.push(nb.len() as u32);
            cert.extend(nb);
        }
        (cert, at)
    }

    /// Depth-first search over individualizations. Returns `Some(level)` when
    /// an automorphism shows that everything below `level` is already covered.
    fn search(&mut self, colour: Vec<u32>, prefix: &mut Vec<usize>) -> Option<usize> {
        let cells = count_distinct(&colour);
        if cells == self.n {
            self.leaves += 1;
            assert!(self.leaves <= LEAF_LIMIT, "canonical form search exceeded {LEAF_LIMIT} leaves");
            let (cert, order) = self.certificate(&colour);
            let Some(first) = &self.first else {
                self.first = Some((cert.clone(), order.clone(), prefix.clone()));
                self.best = Some((cert, order, prefix.clone()));
                return None;
            };
            let best = self.best.as_ref().unwrap();
            let matched = if cert == first.0 {
                Some((first.1.clone(), first.2.clone()))
            } else if cert == best.0 {
                Some((best.1.clone(), best.2.clone()))
            } else {
                None
            };
            if let Some((other_order, other_prefix)) = matched {
                // order[k] -> other_order[k] is an automorphism
                let mut perm = vec![0usize; self.n];
                for k in 0..self.n {
                    perm[order[k]] = other_order[k];
                }
                self.automorphisms.push(perm);
                let common = prefix.iter().zip(&other_prefix).take_while(|(a, b)| a == b).count();
                return Some(common);
            }
            if cert < best.0 {
                self.best = Some((cert, order, prefix.clone()));
            }
            return None;
        }
        // first non-singleton cell in colour order
        let mut size = BTreeMap::<u32, usize>::new();
        for &c in &colour {
            *size.entry(c).or_default() += 1;
        }
        let target = *size.iter().find(|(_, &s)| s > 1).unwrap().0;
        let cell: Vec<usize> = (0..self.n).filter(|&i| colour[i] == target).collect();

        let level = prefix.len();
        if cell[1..].iter().all(|&v| self.are_twins(cell[0], v)) {
            // every ordering of a twin cell is related by an automorphism
            let mut c: Vec<u32> = colour.iter().map(|&x| x * self.n as u32 + self.n as u32 - 1).collect();
            for (k, &v) in cell.iter().enumerate() {
                c[v] = target * self.n as u32 + k as u32;
            }
            self.refine(&mut c);
            prefix.push(cell[0]);
            let jump = self.search(c, prefix);
            prefix.pop();
            return jump.filter(|&j| j < level);
        }
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if explored.iter().any(|&u| self.are_twins(u, v)) {
                continue;
            }
            if !explored.is_empty() && self.same_orbit(prefix, &explored, v) {
                continue;
            }
            let mut c: Vec<u32> = colour.iter().map(|&x| 2 * x + 1).collect();
            c[v] = 2 * target;
            self.refine(&mut c);
            prefix.push(v);
            let jump = self.search(c, prefix);
            prefix.pop();
            explored.push(v);
            if let Some(j) = jump {
                if j < level {
                    return Some(j);
                }
            }
        }
        None
    }

    fn are_twins(&self, u: usize, v: usize) -> bool {
        let a: Vec<usize> = self.adj[u].iter().copied().filter(|&x| x != v).collect();
        let b: Vec<usize> = self.adj[v].iter().copied().filter(|&x| x != u).collect();
        a == b
    }

    /// Whether `v` is in the orbit of an explored vertex under the stored
    /// automorphisms that fix `prefix` pointwise.
    fn same_orbit(&self, prefix: &[usize], explored: &[usize], v: usize) -> bool {
        let gens: Vec<&Vec<usize>> =
            self.automorphisms.iter().filter(|p| prefix.iter().all(|&x| p[x] == x)).collect();
        if gens.is_empty() {
            return false;
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for g in gens {
            for x in 0..self.n {
                let (a, b) = (find(&mut parent, x), find(&mut parent, g[x]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == rv)
    }
}

fn count_distinct(colour: &[u32]) -> usize {
    colour.iter().collect::<BTreeSet<_>>().len()
}

/// Canonical form of a ball. Oblivious mode erases identifiers first.
pub fn canonical_form(b: &Ball, mode: ClassMode) -> NeighbourhoodClass {
    let n = b.len();
    let use_ids = mode == ClassMode::WithIds;
    let encodings: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            let mut e = b.labels()[i].encoded();
            if use_ids {
                let id = b.ids().map(|ids| ids[i].to_bytes_be()).unwrap_or_default();
                e.push(0xfe);
                e.extend_from_slice(&(id.len() as u32).to_be_bytes());
                e.extend_from_slice(&id);
            }
            e
        })
        .collect();
    let table: Vec<&Vec<u8>> = encodings.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let label_idx: Vec<u32> =
        encodings.iter().map(|e| table.binary_search(&e).unwrap() as u32).collect();

    let adj: Vec<Vec<usize>> = (0..n).map(|i| b.adjacency(i).to_vec()).collect();
    let dist = b.distances();
    let keys: Vec<(u8, usize, u32, usize)> =
        (0..n).map(|i| (u8::from(i != 0), dist[i], label_idx[i], adj[i].len())).collect();
    let sorted: Vec<_> = keys.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let mut colour: Vec<u32> = keys.iter().map(|k| sorted.binary_search(&k).unwrap() as u32).collect();

    let mut search = Search { n, adj: &adj, label_idx: &label_idx, first: None, best: None, automorphisms: Vec::new(), leaves: 0 };
    search.refine(&mut colour);
    search.search(colour, &mut Vec::new());
    let (cert, _, _) = search.best.unwrap();

    let mut bytes = vec![u8::from(use_ids)];
    bytes.extend_from_slice(&(n as u32).to_be_bytes());
    bytes.extend_from_slice(&(b.radius() as u32).to_be_bytes());
    bytes.extend_from_slice(&(table.len() as u32).to_be_bytes());
    for e in &table {
        bytes.extend_from_slice(&(e.len() as u32).to_be_bytes());
        bytes.extend_from_slice(e);
    }
    for x in cert {
        bytes.extend_from_slice(&x.to_be_bytes());
    }
    NeighbourhoodClass { mode, bytes }
}

/// Multiset of neighbourhood classes, keyed by class.
pub type ClassMultiset = BTreeMap<NeighbourhoodClass, usize>;

/// Class of `B(v, t)` for every node `v`, in node order.
pub fn node_classes(
    g: &dyn GraphView,
    ids: Option<&IdAssignment>,
    t: usize,
    mode: ClassMode,
) -> Vec<NeighbourhoodClass> {
    (0..g.node_count())
        .into_par_iter()
        .map(|v| canonical_form(&Ball::extract(g, ids, v, t).expect("node in range"), mode))
        .collect()
}

pub fn neighbourhood_multiset(
    g: &dyn GraphView,
    ids: Option<&IdAssignment>,
    t: usize,
    mode: ClassMode,
) -> ClassMultiset {
    let mut out = ClassMultiset::new();
    for c in node_classes(g, ids, t, mode) {
        *out.entry(c).or_default() += 1;
    }
    out
}

/// Distinct classes together with one representative ball each.
pub fn class_representatives(
    g: &dyn GraphView,
    nodes: impl IntoIterator<Item = usize>,
    t: usize,
) -> BTreeMap<NeighbourhoodClass, Ball> {
    let nodes: Vec<usize> = nodes.into_iter().collect();
    let found: Vec<(NeighbourhoodClass, Ball)> = nodes
        .into_par_iter()
        .map(|v| {
            let b = Ball::extract(g, None, v, t).expect("node in range");
            (canonical_form(&b, ClassMode::Oblivious), b)
        })
        .collect();
    let mut out = BTreeMap::new();
    for (c, b) in found {
        out.entry(c).or_insert(b);
    }
    out
}

/// Serialized class multiset: sorted hex strings with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFile {
    pub mode: ClassMode,
    pub radius: usize,
    pub classes: Vec<ClassCount>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: NeighbourhoodClass,
    pub count: usize,
}

impl ClassFile {
    pub fn from_multiset(mode: ClassMode, radius: usize, m: &ClassMultiset) -> Self {
        ClassFile {
            mode,
            radius,
            classes: m.iter().map(|(c, &count)| ClassCount { class: c.clone(), count }).collect(),
        }
    }

    pub fn from_set(mode: ClassMode, radius: usize, s: &BTreeSet<NeighbourhoodClass>) -> Self {
        ClassFile { mode, radius, classes: s.iter().map(|c| ClassCount { class: c.clone(), count: 1 }).collect() }
    }

    pub fn to_multiset(&self) -> ClassMultiset {
        let mut m = ClassMultiset::new();
        for c in &self.classes {
            *m.entry(c.class.clone()).or_default() += c.count;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Holds,
    /// A class in the left operand violating the relation.
    MissingFromRight(NeighbourhoodClass),
    MissingFromLeft(NeighbourhoodClass),
}

/// Support containment `a ⊆ b` (multiplicities ignored).
pub fn compare_subset(a: &ClassMultiset, b: &ClassMultiset) -> Comparison {
    match a.keys().find(|c| !b.contains_key(*c)) {
        Some(c) => Comparison::MissingFromRight(c.clone()),
        None => Comparison::Holds,
    }
}

/// Support equality (multiplicities ignored).
pub fn compare_equal(a: &ClassMultiset, b: &ClassMultiset) -> Comparison {
    match compare_subset(a, b) {
        Comparison::Holds => match b.keys().find(|c| !a.contains_key(*c)) {
            Some(c) => Comparison::MissingFromLeft(c.clone()),
            None => Comparison::Holds,
        },
        other => other,
    }
}
