//! Radius-`t` balls and the local view handed to deciders.
//!
//! A decider only ever sees a [`LocalView`]. Handles are local (the center is
//! handle 0, others numbered in discovery order), so nothing about the host
//! graph's node numbering leaks. Neighbour lists may only be read for nodes at
//! distance `< t` from the center; reading further is a locality violation and
//! panics.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{GraphView, IdAssignment, NodeLabel};

pub type Handle = usize;

pub trait LocalView {
    fn radius(&self) -> usize;

    fn center(&self) -> Handle {
        0
    }

    fn label(&self, h: Handle) -> NodeLabel;

    fn id(&self, h: Handle) -> Option<BigUint>;

    /// Degree of `h`; requires `dist(h) < radius`.
    fn degree(&self, h: Handle) -> usize;

    /// The `i`-th neighbour of `h`; requires `dist(h) < radius`.
    fn neighbour(&self, h: Handle, i: usize) -> Handle;

    fn neighbours(&self, h: Handle) -> Vec<Handle> {
        (0..self.degree(h)).map(|i| self.neighbour(h, i)).collect()
    }

    /// Edge test between two nodes already known to the caller.
    fn adjacent(&self, a: Handle, b: Handle) -> bool;

    /// Upper bound on the distance from the center; exact for a
    /// materialized ball.
    fn distance_bound(&self, h: Handle) -> usize;
}

/// Materialized ball: induced sub-structure on `{u : dist(u, center) <= t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    radius: usize,
    origin: Vec<usize>,
    labels: Vec<NodeLabel>,
    adj: Vec<Vec<usize>>,
    dist: Vec<usize>,
    ids: Option<Vec<BigUint>>,
}

impl Ball {
    /// Extracts `B(center, t)` from a graph view.
    pub fn extract(g: &dyn GraphView, ids: Option<&IdAssignment>, center: usize, t: usize) -> Result<Self> {
        if center >= g.node_count() {
            return Err(Error::Input(format!("unknown center node {center}")));
        }
        let mut index: HashMap<usize, usize> = HashMap::from([(center, 0)]);
        let mut origin = vec![center];
        let mut dist = vec![0];
        let mut queue = VecDeque::from([center]);
        while let Some(u) = queue.pop_front() {
            let du = dist[index[&u]];
            if du == t {
                continue;
            }
            for v in g.neighbours(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(v) {
                    e.insert(origin.len());
                    origin.push(v);
                    dist.push(du + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut adj = vec![Vec::new(); origin.len()];
        for (i, &u) in origin.iter().enumerate() {
            if dist[i] < t {
                for v in g.neighbours(u) {
                    adj[i].push(index[&v]);
                }
            } else if g.degree(u) > origin.len() {
                // high-degree boundary node: probe the ball instead
                for (j, &v) in origin.iter().enumerate() {
                    if j != i && g.has_edge(u, v) {
                        adj[i].push(j);
                    }
                }
            } else {
                // boundary node: only edges to other ball nodes
                for v in g.neighbours(u) {
                    if let Some(&j) = index.get(&v) {
                        adj[i].push(j);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let labels = origin.iter().map(|&u| g.label(u)).collect();
        let ids = ids.map(|a| origin.iter().map(|&u| a.get(u).clone()).collect());
        Ok(Ball { radius: t, origin, labels, adj, dist, ids })
    }

    /// Materializes the ball seen through a local view.
    pub fn from_view(view: &dyn LocalView) -> Self {
        let t = view.radius();
        let mut index: HashMap<Handle, usize> = HashMap::from([(view.center(), 0)]);
        let mut handles = vec![view.center()];
        let mut dist = vec![0usize];
        let mut queue = VecDeque::from([view.center()]);
        while let Some(h) = queue.pop_front() {
            let dh = dist[index[&h]];
            if dh == t {
                continue;
            }
            for w in view.neighbours(h) {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(w) {
                    e.insert(handles.len());
                    handles.push(w);
                    dist.push(dh + 1);
                    queue.push_back(w);
                }
            }
        }
        let n = handles.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            if dist[i] < t {
                for w in view.neighbours(handles[i]) {
                    let j = index[&w];
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let boundary: Vec<usize> = (0..n).filter(|&i| dist[i] == t).collect();
        for (a, &i) in boundary.iter().enumerate() {
            for &j in &boundary[a + 1..] {
                if view.adjacent(handles[i], handles[j]) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let labels = handles.iter().map(|&h| view.label(h)).collect();
        let ids = if handles.iter().all(|&h| view.id(h).is_some()) {
            Some(handles.iter().map(|&h| view.id(h).unwrap()).collect())
        } else {
            None
        };
        Ball { radius: t, origin: handles, labels, adj, dist, ids }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Host-graph node behind each ball node.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn adjacency(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn distances(&self) -> &[usize] {
        &self.dist
    }

    pub fn ids(&self) -> Option<&[BigUint]> {
        self.ids.as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Assembles a ball from parts; node 0 is the center and `adj` must be
    /// symmetric.
    pub fn from_parts(radius: usize, labels: Vec<NodeLabel>, mut adj: Vec<Vec<usize>>, dist: Vec<usize>) -> Self {
        assert!(!labels.is_empty() && labels.len() == adj.len() && labels.len() == dist.len());
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let origin = (0..labels.len()).collect();
        Ball { radius, origin, labels, adj, dist, ids: None }
    }

    /// Same ball with identifiers replaced (or erased).
    pub fn with_ids(&self, ids: Option<Vec<BigUint>>) -> Self {
        if let Some(ids) = &ids {
            assert_eq!(ids.len(), self.len());
        }
        Ball { ids, ..self.clone() }
    }

    /// Relabels nodes by `perm` (old index -> new index); the center must stay 0.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm[0], 0);
        let n = self.len();
        let mut labels = vec![self.labels[0].clone(); n];
        let mut adj = vec![Vec::new(); n];
        let mut dist = vec![0; n];
        let mut origin = vec![0; n];
        let mut ids = self.ids.as_ref().map(|v| vec![v[0].clone(); n]);
        for i in 0..n {
            let p = perm[i];
            labels[p] = self.labels[i].clone();
            dist[p] = self.dist[i];
            origin[p] = self.origin[i];
            adj[p] = self.adj[i].iter().map(|&j| perm[j]).collect();
            adj[p].sort_unstable();
            if let (Some(dst), Some(src)) = (&mut ids, &self.ids) {
                dst[p] = src[i].clone();
            }
        }
        Ball { radius: self.radius, origin, labels, adj, dist, ids }
    }
}

impl GraphView for Ball {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn label(&self, u: usize) -> NodeLabel {
        self.labels[u].clone()
    }

    fn neighbours(&self, u: usize) -> Vec<usize> {
        self.adj[u].clone()
    }

    fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }
}

impl LocalView for Ball {
    fn radius(&self) -> usize {
        self.radius
    }

    fn label(&self, h: Handle) -> NodeLabel {
        self.labels[h].clone()
    }

    fn id(&self, h: Handle) -> Option<BigUint> {
        self.ids.as_ref().map(|v| v[h].clone())
    }

    fn degree(&self, h: Handle) -> usize {
        assert!(self.dist[h] < self.radius, "locality violation: node at distance {} expanded", self.dist[h]);
        self.adj[h].len()
    }

    fn neighbour(&self, h: Handle, i: usize) -> Handle {
        assert!(self.dist[h] < self.radius, "locality violation: node at distance {} expanded", self.dist[h]);
        self.adj[h][i]
    }

    fn adjacent(&self, a: Handle, b: Handle) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    fn distance_bound(&self, h: Handle) -> usize {
        self.dist[h]
    }
}

struct LazyState {
    origin: Vec<usize>,
    index: HashMap<usize, Handle>,
    bound: Vec<usize>,
    labels: Vec<Option<NodeLabel>>,
    nbrs: HashMap<Handle, Vec<usize>>,
    /// Exact distances of all nodes within `radius - 1`, computed on demand.
    exact: Option<HashMap<usize, usize>>,
}

/// On-demand ball over a graph view: only the nodes a decider actually
/// inspects are touched.
pub struct LazyBall<'g> {
    graph: &'g dyn GraphView,
    ids: Option<&'g IdAssignment>,
    radius: usize,
    state: RefCell<LazyState>,
}

impl<'g> LazyBall<'g> {
    pub fn new(graph: &'g dyn GraphView, ids: Option<&'g IdAssignment>, center: usize, radius: usize) -> Self {
        LazyBall {
            graph,
            ids,
            radius,
            state: RefCell::new(LazyState {
                origin: vec![center],
                index: HashMap::from([(center, 0)]),
                bound: vec![0],
                labels: vec![None],
                nbrs: HashMap::new(),
                exact: None,
            }),
        }
    }

    /// Number of distinct nodes touched so far.
    pub fn touched(&self) -> usize {
        self.state.borrow().origin.len()
    }

    fn origin_of(&self, h: Handle) -> usize {
        self.state.borrow().origin[h]
    }

    fn ensure_expandable(&self, h: Handle) {
        let (node, bound) = {
            let st = self.state.borrow();
            (st.origin[h], st.bound[h])
        };
        if bound < self.radius {
            return;
        }
        if self.radius == 0 {
            panic!("locality violation: radius-0 view has no neighbours");
        }
        let mut st = self.state.borrow_mut();
        if st.exact.is_none() {
            let center = st.origin[0];
            let mut dist = HashMap::from([(center, 0usize)]);
            let mut queue = VecDeque::from([center]);
            while let Some(u) = queue.pop_front() {
                let du = dist[&u];
                if du + 1 >= self.radius {
                    continue;
                }
                for v in self.graph.neighbours(u) {
                    if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                        e.insert(du + 1);
                        queue.push_back(v);
                    }
                }
            }
            st.exact = Some(dist);
        }
        match st.exact.as_ref().unwrap().get(&node) {
            Some(&d) => st.bound[h] = d,
            None => panic!("locality violation: node beyond distance {} expanded", self.radius - 1),
        }
    }

    fn with_nbrs<R>(&self, h: Handle, f: impl FnOnce(&[usize]) -> R) -> R {
        self.ensure_expandable(h);
        let mut st = self.state.borrow_mut();
        if !st.nbrs.contains_key(&h) {
            let list = self.graph.neighbours(st.origin[h]);
            st.nbrs.insert(h, list);
        }
        f(&st.nbrs[&h])
    }

    fn register(&self, node: usize, bound: usize) -> Handle {
        let mut st = self.state.borrow_mut();
        if let Some(&h) = st.index.get(&node) {
            if bound < st.bound[h] {
                st.bound[h] = bound;
            }
            return h;
        }
        let h = st.origin.len();
        st.origin.push(node);
        st.index.insert(node, h);
        st.bound.push(bound);
        st.labels.push(None);
        h
    }
}

impl LocalView for LazyBall<'_> {
    fn radius(&self) -> usize {
        self.radius
    }

    fn label(&self, h: Handle) -> NodeLabel {
        if let Some(l) = &self.state.borrow().labels[h] {
            return l.clone();
        }
        let l = self.graph.label(self.origin_of(h));
        self.state.borrow_mut().labels[h] = Some(l.clone());
        l
    }

    fn id(&self, h: Handle) -> Option<BigUint> {
        self.ids.map(|a| a.get(self.origin_of(h)).clone())
    }

    fn degree(&self, h: Handle) -> usize {
        self.with_nbrs(h, |l| l.len())
    }

    fn neighbour(&self, h: Handle, i: usize) -> Handle {
        let node = self.with_nbrs(h, |l| l[i]);
        let bound = self.state.borrow().bound[h] + 1;
        self.register(node, bound)
    }

    fn adjacent(&self, a: Handle, b: Handle) -> bool {
        a != b && self.graph.has_edge(self.origin_of(a), self.origin_of(b))
    }

    fn distance_bound(&self, h: Handle) -> usize {
        self.state.borrow().bound[h]
    }
}

/// Ball extraction as a free function.
pub fn ball(g: &dyn GraphView, ids: Option<&IdAssignment>, center: usize, t: usize) -> Result<Ball> {
    Ball::extract(g, ids, center, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::builders::{cycle, path};
    use crate::graph::{bfs_distances, NodeLabel};

    #[test]
    fn radius_zero_is_the_center_alone() {
        let g = cycle(6, NodeLabel::opaque(1));
        let b = ball(&g, None, 2, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.edge_count(), 0);
    }

    #[test]
    fn five_cycle_radius_two_is_induced() {
        let g = cycle(5, NodeLabel::opaque(0));
        let b = ball(&g, None, 0, 2).unwrap();
        assert_eq!(b.len(), 5);
        // the far edge between the two distance-2 nodes closes the cycle
        assert_eq!(b.edge_count(), 5);
    }

    #[test]
    fn path_middle() {
        let g = path(7, NodeLabel::opaque(0));
        let b = ball(&g, None, 3, 2).unwrap();
        assert_eq!((b.len(), b.edge_count()), (5, 4));
    }

    #[test]
    fn unknown_center() {
        let g = path(3, NodeLabel::opaque(0));
        assert!(matches!(ball(&g, None, 9, 1), Err(Error::Input(_))));
    }

    #[test]
    fn ball_nodes_match_bfs_frontier() {
        let g = crate::graph::builders::opaque(
            &[0, 1, 2, 3, 4, 5, 6, 7],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (4, 5), (5, 6), (6, 7), (7, 4)],
        )
        .unwrap();
        for c in 0..8 {
            for t in 0..5 {
                let b = ball(&g, None, c, t).unwrap();
                let d = bfs_distances(&g, c, usize::MAX);
                let mut expected: Vec<usize> = (0..8).filter(|&u| d[u].unwrap() <= t).collect();
                let mut got = b.origin().to_vec();
                got.sort();
                expected.sort();
                assert_eq!(got, expected);
                let expected_edges =
                    g.edges().iter().filter(|(u, v)| d[*u].unwrap() <= t && d[*v].unwrap() <= t).count();
                assert_eq!(b.edge_count(), expected_edges);
            }
        }
    }

    #[test]
    fn lazy_and_materialized_views_agree() {
        let g = crate::graph::builders::opaque(
            &[0, 1, 2, 3, 4, 5, 6],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 0), (1, 4), (2, 5)],
        )
        .unwrap();
        for c in 0..7 {
            for t in 0..4 {
                let lazy = LazyBall::new(&g, None, c, t);
                let from_lazy = Ball::from_view(&lazy);
                let direct = ball(&g, None, c, t).unwrap();
                let mut a = from_lazy.origin().iter().map(|&h| lazy.origin_of(h)).collect::<Vec<_>>();
                let mut b = direct.origin().to_vec();
                a.sort();
                b.sort();
                assert_eq!(a, b);
                assert_eq!(from_lazy.edge_count(), direct.edge_count());
            }
        }
    }

    #[test]
    fn lazy_ball_tightens_overestimated_distances() {
        // 0-1-2-3 and 0-3: reaching 3 the long way first must not block it.
        let g = crate::graph::builders::opaque(&[0, 1, 2, 3, 4], &[(0, 1), (1, 2), (2, 3), (0, 3), (3, 4)]).unwrap();
        let v = LazyBall::new(&g, None, 0, 2);
        let one = v.neighbours(0)[0];
        let two = v.neighbours(one).into_iter().find(|&h| h != 0).unwrap();
        assert_eq!(v.distance_bound(two), 2);
        assert_eq!(v.degree(0), 2);
        let three = v.neighbour(0, 1);
        assert_eq!(v.distance_bound(three), 1);
        assert_eq!(v.degree(three), 3);
    }

    #[test]
    #[should_panic(expected = "locality violation")]
    fn lazy_ball_refuses_to_look_too_far() {
        let g = path(6, NodeLabel::opaque(0));
        let v = LazyBall::new(&g, None, 0, 1);
        let one = v.neighbour(0, 0);
        v.degree(one);
    }
}
