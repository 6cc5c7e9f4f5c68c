//! Layered trees, the large instance `T_r`, the small-instance family `H_r`,
//! the oblivious checker for `P'` and the identifier-based decider for `P`.
//!
//! A layered tree of depth `k` is the complete binary tree on nodes `(x, y)`,
//! `0 <= y <= k`, `0 <= x < 2^y`, with every level additionally joined into a
//! path. Node `(x, y)` has index `2^y - 1 + x`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ball::LocalView;
use crate::error::{node_cap, Error, Result};
use crate::graph::{BoundFunction, LabelledGraph, NodeLabel, Params, Role};
use crate::local::{Coins, DeciderMode, LocalDecider, LocalOutput};

/// Deepest level whose coordinates fit the label encoding.
pub const MAX_DEPTH: u32 = 62;

/// `R(r) = f(2^{r+1} + 1)`.
pub fn cap_r(r: u32, f: BoundFunction) -> BigUint {
    f.eval((1u64 << (r + 1)) + 1)
}

fn depth_of(r: u32, f: BoundFunction) -> Result<u32> {
    let big = cap_r(r, f);
    match big.to_u32() {
        Some(d) if d <= MAX_DEPTH => Ok(d),
        _ => Err(Error::Resource { what: "layered-tree depth".into(), limit: MAX_DEPTH as u64, reached: big.to_u64().unwrap_or(u64::MAX) }),
    }
}

fn check_nodes(count: u64) -> Result<()> {
    if count > node_cap() {
        return Err(Error::Resource { what: "nodes".into(), limit: node_cap(), reached: count });
    }
    Ok(())
}

pub fn tree_index(x: u64, y: u32) -> usize {
    ((1u64 << y) - 1 + x) as usize
}

pub fn tree_node_count(k: u32) -> u64 {
    (1u64 << (k + 1)) - 1
}

pub fn tree_edge_count(k: u32) -> u64 {
    (1u64 << (k + 2)) - k as u64 - 4
}

/// Coordinates `(x, y)` adjacent to `(x, y)` in a depth-`k` layered tree.
pub fn tree_neighbours(x: u64, y: u32, k: u32) -> Vec<(u64, u32)> {
    let mut out = Vec::with_capacity(5);
    if y > 0 {
        out.push((x / 2, y - 1));
    }
    if x > 0 {
        out.push((x - 1, y));
    }
    if x + 1 < 1u64 << y {
        out.push((x + 1, y));
    }
    if y < k {
        out.push((2 * x, y + 1));
        out.push((2 * x + 1, y + 1));
    }
    out
}

fn tree_adjacent(a: (u64, u32), b: (u64, u32)) -> bool {
    let ((xa, ya), (xb, yb)) = (a, b);
    (ya == yb && xa.abs_diff(xb) == 1) || (yb == ya + 1 && xb / 2 == xa) || (ya == yb + 1 && xa / 2 == xb)
}

/// Layered tree of depth `k`, every node labelled `(r, x, y)`.
pub fn layered_tree(k: u32, r: u32) -> Result<LabelledGraph> {
    if k > MAX_DEPTH {
        return Err(Error::Input(format!("depth {k} exceeds {MAX_DEPTH}")));
    }
    check_nodes(tree_node_count(k))?;
    let params = Params::Tree { r };
    let mut labels = Vec::with_capacity(tree_node_count(k) as usize);
    let mut edges = Vec::with_capacity(tree_edge_count(k) as usize);
    for y in 0..=k {
        for x in 0..1u64 << y {
            labels.push(NodeLabel::new(params.clone(), Role::TreeNode { x, y }));
            let u = tree_index(x, y);
            if x > 0 {
                edges.push((u - 1, u));
            }
            if y > 0 {
                edges.push((tree_index(x / 2, y - 1), u));
            }
        }
    }
    LabelledGraph::new(labels, &edges)
}

/// The large instance `T_r`: a layered tree of depth `R(r)`.
pub fn build_t(r: u32, f: BoundFunction) -> Result<LabelledGraph> {
    layered_tree(depth_of(r, f)?, r)
}

/// A member of `H_r`: the depth-`r` layered subtree of `T_r` rooted at
/// `root`, plus a pivot adjacent to every border node.
#[derive(Clone, Debug)]
pub struct SmallInstance {
    pub r: u32,
    pub depth: u32,
    pub root: (u64, u32),
    /// Coordinates of the border nodes, sorted.
    pub border: Vec<(u64, u32)>,
    pub graph: LabelledGraph,
}

impl SmallInstance {
    /// Node index of the pivot (always last).
    pub fn pivot(&self) -> usize {
        self.graph.labels().len() - 1
    }
}

/// Nodes of the depth-`r` subtree rooted at `(x0, y0)`, level by level.
fn subtree_nodes(r: u32, (x0, y0): (u64, u32)) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for d in 0..=r {
        for i in 0..1u64 << d {
            out.push(((x0 << d) + i, y0 + d));
        }
    }
    out
}

/// Border of the depth-`r` subtree at `root` inside a depth-`depth` tree.
pub fn border_set(r: u32, depth: u32, root: (u64, u32)) -> Vec<(u64, u32)> {
    let (x0, y0) = root;
    let mut out = Vec::new();
    for d in 0..=r {
        let y = y0 + d;
        let width = 1u64 << d;
        for i in 0..width {
            let x = (x0 << d) + i;
            let outside_parent = d == 0 && y > 0;
            let outside_left = i == 0 && x > 0;
            let outside_right = i + 1 == width && x + 1 < 1u64 << y;
            let outside_children = d == r && y < depth;
            if outside_parent || outside_left || outside_right || outside_children {
                out.push((x, y));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Root positions admissible for `H_r`: all `(x0, y0)` with `y0 + r <= R(r)`.
pub fn small_instance_roots(r: u32, f: BoundFunction) -> Result<Vec<(u64, u32)>> {
    let depth = depth_of(r, f)?;
    if r > depth {
        return Ok(Vec::new());
    }
    let count = tree_node_count(depth - r);
    check_nodes(count)?;
    Ok((0..=depth - r).flat_map(|y| (0..1u64 << y).map(move |x| (x, y))).collect())
}

pub fn small_instance(r: u32, f: BoundFunction, root: (u64, u32)) -> Result<SmallInstance> {
    let depth = depth_of(r, f)?;
    let (x0, y0) = root;
    if y0 + r > depth || x0 >= 1u64 << y0 {
        return Err(Error::Input(format!("root {root:?} is not admissible for r = {r}")));
    }
    let nodes = subtree_nodes(r, root);
    let params = Params::Tree { r };
    let mut labels: Vec<NodeLabel> =
        nodes.iter().map(|&(x, y)| NodeLabel::new(params.clone(), Role::TreeNode { x, y })).collect();
    labels.push(NodeLabel::new(params, Role::Pivot));
    let local = |(x, y): (u64, u32)| -> usize {
        let d = y - y0;
        ((1usize << d) - 1) + (x - (x0 << d)) as usize
    };
    let mut edges = Vec::new();
    for &(x, y) in &nodes {
        let u = local((x, y));
        let d = y - y0;
        if x > x0 << d {
            edges.push((u - 1, u));
        }
        if d > 0 {
            edges.push((local((x / 2, y - 1)), u));
        }
    }
    let border = border_set(r, depth, root);
    let pivot = nodes.len();
    for &b in &border {
        edges.push((local(b), pivot));
    }
    let graph = LabelledGraph::new(labels, &edges)?;
    Ok(SmallInstance { r, depth, root, border, graph })
}

/// The family `H_r`, one instance per admissible root.
pub fn enumerate_small_instances(r: u32, f: BoundFunction) -> Result<Vec<SmallInstance>> {
    let roots = small_instance_roots(r, f)?;
    check_nodes(roots.len() as u64 * (tree_node_count(r) + 1))?;
    roots.into_iter().map(|root| small_instance(r, f, root)).collect()
}

fn tree_coords(label: &NodeLabel) -> Option<(u64, u32)> {
    match label.role {
        Role::TreeNode { x, y } => Some((x, y)),
        _ => None,
    }
}

/// Oblivious horizon-2 checker for `P' = P ∪ {T_r}` with bound `f`.
#[derive(Clone, Copy, Debug)]
pub struct TreeChecker {
    pub f: BoundFunction,
}

impl TreeChecker {
    pub fn check(&self, view: &dyn LocalView) -> bool {
        let me = view.label(0);
        let Params::Tree { r } = me.params else { return false };
        let Ok(depth) = depth_of(r, self.f) else { return false };
        let nbrs = view.neighbours(0);
        let mut labels = Vec::with_capacity(nbrs.len());
        for &h in &nbrs {
            let l = view.label(h);
            if l.params != me.params {
                return false;
            }
            labels.push(l);
        }
        match me.role {
            Role::TreeNode { x, y } => check_tree_node(view, (x, y), depth, &nbrs, &labels),
            Role::Pivot => check_pivot(r, depth, &labels),
            _ => false,
        }
    }
}

fn check_tree_node(view: &dyn LocalView, me: (u64, u32), depth: u32, nbrs: &[usize], labels: &[NodeLabel]) -> bool {
    let (x, y) = me;
    if y > depth || x >= 1u64 << y {
        return false;
    }
    let expected = tree_neighbours(x, y, depth);
    let mut seen = vec![false; expected.len()];
    let mut pivots = 0;
    let mut tree_nbrs = Vec::new();
    for (&h, l) in nbrs.iter().zip(labels) {
        match l.role {
            Role::Pivot => pivots += 1,
            Role::TreeNode { x, y } => {
                let Some(k) = expected.iter().position(|&c| c == (x, y)) else { return false };
                if seen[k] {
                    return false;
                }
                seen[k] = true;
                tree_nbrs.push((h, (x, y)));
            }
            _ => return false,
        }
    }
    let missing = seen.iter().any(|&s| !s);
    if pivots > 1 || missing != (pivots == 1) {
        return false;
    }
    for (i, &(a, ca)) in tree_nbrs.iter().enumerate() {
        for &(b, cb) in &tree_nbrs[i + 1..] {
            if view.adjacent(a, b) != tree_adjacent(ca, cb) {
                return false;
            }
        }
    }
    true
}

fn check_pivot(r: u32, depth: u32, labels: &[NodeLabel]) -> bool {
    let mut coords = Vec::with_capacity(labels.len());
    for l in labels {
        let Some(c) = tree_coords(l) else { return false };
        coords.push(c);
    }
    if coords.is_empty() {
        return false;
    }
    coords.sort_unstable();
    if coords.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    // the root of the instance is an ancestor, at most r levels up, of every border node
    let &(bx, by) = coords.iter().min_by_key(|&&(x, y)| (y, x)).unwrap();
    (0..=r.min(by)).any(|d| {
        let root = (bx >> d, by - d);
        root.1 + r <= depth && border_set(r, depth, root) == coords
    })
}

impl LocalDecider for TreeChecker {
    fn name(&self) -> String {
        format!("tree-Pprime:{}", self.f)
    }

    fn horizon(&self) -> usize {
        2
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        LocalOutput::from_bool(self.check(view))
    }
}

/// Decider for `P` under bounded identifiers: the structural checker, plus
/// rejection at any node whose identifier reaches `R(r)`.
#[derive(Clone, Copy, Debug)]
pub struct TreeDecider {
    pub f: BoundFunction,
}

impl LocalDecider for TreeDecider {
    fn name(&self) -> String {
        format!("tree-P:{}", self.f)
    }

    fn horizon(&self) -> usize {
        2
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::UsesIds
    }

    fn bound(&self) -> Option<BoundFunction> {
        Some(self.f)
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        if !(TreeChecker { f: self.f }).check(view) {
            return LocalOutput::No;
        }
        let Params::Tree { r } = view.label(0).params else { return LocalOutput::No };
        let id = view.id(0).expect("identifiers present");
        LocalOutput::from_bool(id < cap_r(r, self.f))
    }
}

/// Promise cycle problem: an `n`-cycle labelled `r` with `n = r` (yes) or
/// `n = f(r)` (no). Rejects at identifiers `>= f(r)`.
#[derive(Clone, Copy, Debug)]
pub struct CyclePromiseDecider {
    pub f: BoundFunction,
}

impl LocalDecider for CyclePromiseDecider {
    fn name(&self) -> String {
        format!("cycle-promise:{}", self.f)
    }

    fn horizon(&self) -> usize {
        0
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::UsesIds
    }

    fn bound(&self) -> Option<BoundFunction> {
        Some(self.f)
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        let Params::Cycle { r } = view.label(0).params else { return LocalOutput::OffPromise };
        let id = view.id(0).expect("identifiers present");
        LocalOutput::from_bool(id < self.f.eval(r))
    }
}

/// Cycle of length `n` with every node labelled `r`.
pub fn promise_cycle(n: usize, r: u64) -> LabelledGraph {
    crate::graph::builders::cycle(n, NodeLabel::new(Params::Cycle { r }, Role::CycleNode))
}

/// Summary of the tree family for reporting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeFamilySummary {
    pub r: u32,
    pub f: BoundFunction,
    pub depth: u32,
    pub t_nodes: u64,
    pub t_edges: u64,
    pub instances: u64,
    pub instance_nodes: u64,
}

pub fn family_summary(r: u32, f: BoundFunction) -> Result<TreeFamilySummary> {
    let depth = depth_of(r, f)?;
    let instances = if r > depth { 0 } else { tree_node_count(depth - r) };
    Ok(TreeFamilySummary {
        r,
        f,
        depth,
        t_nodes: tree_node_count(depth),
        t_edges: tree_edge_count(depth),
        instances,
        instance_nodes: tree_node_count(r) + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::Ball;
    use crate::graph::{GraphView, IdAssignment};
    use crate::local::run_decider;

    #[test]
    fn cap_values() {
        assert_eq!(cap_r(1, BoundFunction::Linear), BigUint::from(5u32));
        assert_eq!(cap_r(2, BoundFunction::Double), BigUint::from(18u32));
        assert_eq!(cap_r(0, BoundFunction::Linear), BigUint::from(3u32));
    }

    #[test]
    fn layered_tree_counts() {
        for k in 0..=12 {
            let g = layered_tree(k, 0).unwrap();
            assert_eq!(g.node_count() as u64, tree_node_count(k));
            assert_eq!(g.edge_count() as u64, tree_edge_count(k));
            // level y induces a path on 2^y nodes
            for y in 0..=k {
                let inside = |u: usize| matches!(g.label_ref(u).role, Role::TreeNode { y: yy, .. } if yy == y);
                let level: Vec<usize> = (0..g.node_count()).filter(|&u| inside(u)).collect();
                assert_eq!(level.len(), 1 << y);
                let e: usize = level.iter().map(|&u| g.neighbours(u).into_iter().filter(|&v| inside(v)).count()).sum();
                assert_eq!(e / 2, (1 << y) - 1);
            }
        }
    }

    #[test]
    fn build_t_examples() {
        let t0 = build_t(0, BoundFunction::Linear).unwrap();
        assert_eq!(t0.node_count(), 15);
        assert_eq!(build_t(1, BoundFunction::Linear).unwrap().node_count(), 63);
        assert_eq!(t0.label_ref(0).role, Role::TreeNode { x: 0, y: 0 });
        assert!(matches!(build_t(5, BoundFunction::Exponential), Err(Error::Resource { .. })));
    }

    #[test]
    fn small_instances_for_r0() {
        let h = enumerate_small_instances(0, BoundFunction::Linear).unwrap();
        assert_eq!(h.len(), 15);
        let root = h.iter().find(|i| i.root == (0, 0)).unwrap();
        assert_eq!(root.border, vec![(0, 0)]);
        for inst in &h {
            assert_eq!(inst.graph.node_count(), 2);
            assert_eq!(inst.graph.degree(inst.pivot()), inst.border.len());
        }
    }

    #[test]
    fn border_matches_outside_neighbours() {
        let f = BoundFunction::Linear;
        for r in 0..=2 {
            let depth = depth_of(r, f).unwrap();
            for root in small_instance_roots(r, f).unwrap() {
                let inside = subtree_nodes(r, root);
                let mut expect: Vec<_> = inside
                    .iter()
                    .copied()
                    .filter(|&(x, y)| tree_neighbours(x, y, depth).iter().any(|c| !inside.contains(c)))
                    .collect();
                expect.sort_unstable();
                assert_eq!(border_set(r, depth, root), expect);
            }
        }
    }

    fn balls_accept(g: &LabelledGraph, d: &dyn LocalDecider) -> bool {
        run_decider(d, g, None).unwrap().accepted()
    }

    #[test]
    fn checker_accepts_t_and_h_for_r1() {
        let c = TreeChecker { f: BoundFunction::Linear };
        assert!(balls_accept(&build_t(1, BoundFunction::Linear).unwrap(), &c));
        for inst in enumerate_small_instances(1, BoundFunction::Linear).unwrap() {
            assert!(balls_accept(&inst.graph, &c), "{:?}", inst.root);
        }
    }

    #[test]
    fn checker_rejects_coordinate_mutations() {
        let c = TreeChecker { f: BoundFunction::Linear };
        let t = build_t(1, BoundFunction::Linear).unwrap();
        for u in 0..t.node_count() {
            let mut g = t.clone();
            let Role::TreeNode { x, y } = g.label_ref(u).role else { unreachable!() };
            g.set_label(u, NodeLabel::new(Params::Tree { r: 1 }, Role::TreeNode { x: x + 1, y }));
            assert!(!balls_accept(&g, &c), "mutation at {u}");
        }
    }

    #[test]
    fn checker_rejects_foreign_shapes() {
        let c = TreeChecker { f: BoundFunction::Linear };
        let l = NodeLabel::new(Params::Tree { r: 0 }, Role::TreeNode { x: 0, y: 0 });
        assert!(!balls_accept(&crate::graph::builders::cycle(4, l), &c));
        // a small instance whose pivot lost one border edge
        let inst = small_instance(1, BoundFunction::Linear, (1, 2)).unwrap();
        let mut g = inst.graph.clone();
        let b = g.neighbours(inst.pivot())[0];
        g.remove_edge(b, inst.pivot()).unwrap();
        assert!(!balls_accept(&g, &c));
    }

    #[test]
    fn decider_separates_for_small_r() {
        let f = BoundFunction::Linear;
        let d = TreeDecider { f };
        for r in 0..=1 {
            let t = build_t(r, f).unwrap();
            let n = t.node_count();
            let ids = crate::graph::random_id_assignment(n, f, 3).unwrap();
            assert!(!run_decider(&d, &t, Some(&ids)).unwrap().accepted());
            for inst in enumerate_small_instances(r, f).unwrap() {
                let ids = crate::graph::random_id_assignment(inst.graph.node_count(), f, 4).unwrap();
                assert!(run_decider(&d, &inst.graph, Some(&ids)).unwrap().accepted());
            }
        }
    }

    #[test]
    fn cycle_promise_examples() {
        let f = BoundFunction::Double;
        let d = CyclePromiseDecider { f };
        let yes = promise_cycle(5, 5);
        assert!(run_decider(&d, &yes, Some(&IdAssignment::from_u64(&[0, 1, 2, 3, 4]).unwrap())).unwrap().accepted());
        assert!(run_decider(&d, &yes, Some(&IdAssignment::from_u64(&[0, 1, 2, 3, 9]).unwrap())).unwrap().accepted());
        let no = promise_cycle(10, 5);
        let worst = IdAssignment::from_u64(&(10..20).collect::<Vec<_>>()).unwrap();
        assert_eq!(run_decider(&d, &no, Some(&worst)).unwrap().rejecting_nodes.len(), 10);
        // ids drawn from [0, 20): rejection needs some id >= 10, which fails
        // only when all ten ids land in [0, 10)
        let mut rejected = 0;
        for s in 0..200 {
            let ids = crate::graph::random_id_assignment(10, f, s).unwrap();
            let all_low = ids.ids().iter().all(|i| *i < BigUint::from(10u32));
            let v = run_decider(&d, &no, Some(&ids)).unwrap();
            assert_eq!(v.accepted(), all_low);
            rejected += u32::from(!v.accepted());
        }
        assert!(rejected >= 195);
    }

    #[test]
    fn pivot_ball_sees_whole_border() {
        let inst = small_instance(2, BoundFunction::Linear, (3, 4)).unwrap();
        let b = Ball::extract(&inst.graph, None, inst.pivot(), 1).unwrap();
        assert_eq!(b.len(), inst.border.len() + 1);
    }
}
