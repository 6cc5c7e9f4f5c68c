//! Layered quadtrees: a `2^h x 2^h` base grid with coarser grids stacked on
//! top, each node linked to the node covering it one level up.

use crate::error::{node_cap, Error, Result};
use crate::graph::{LabelledGraph, NodeLabel, Params, Role};

/// Index arithmetic for a pyramid of height `h`. Level `z` is a
/// `2^{h-z}`-sided grid stored row-major after all lower levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PyramidShape {
    pub height: u32,
}

impl PyramidShape {
    pub fn new(height: u32) -> Self {
        assert!(height < 31, "pyramid height out of range");
        PyramidShape { height }
    }

    pub fn for_side(side: usize) -> Result<Self> {
        if side == 0 || !side.is_power_of_two() {
            return Err(Error::Input(format!("pyramid base side {side} is not a power of two")));
        }
        Ok(PyramidShape::new(side.trailing_zeros()))
    }

    pub fn side(&self, z: u32) -> usize {
        1 << (self.height - z)
    }

    pub fn base_side(&self) -> usize {
        self.side(0)
    }

    /// `(4^{h+1} - 1) / 3`.
    pub fn size(&self) -> usize {
        ((1usize << (2 * (self.height + 1))) - 1) / 3
    }

    pub fn offset(&self, z: u32) -> usize {
        let h = self.height;
        ((1usize << (2 * (h + 1))) - (1usize << (2 * (h + 1 - z)))) / 3
    }

    pub fn index(&self, x: usize, y: usize, z: u32) -> usize {
        self.offset(z) + y * self.side(z) + x
    }

    pub fn coords(&self, i: usize) -> (usize, usize, u32) {
        debug_assert!(i < self.size());
        let mut z = 0;
        while z < self.height && i >= self.offset(z + 1) {
            z += 1;
        }
        let local = i - self.offset(z);
        let s = self.side(z);
        (local % s, local / s, z)
    }

    pub fn apex(&self) -> usize {
        self.size() - 1
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        let (x, y, z) = self.coords(i);
        (z < self.height).then(|| self.index(x / 2, y / 2, z + 1))
    }

    /// Same-level grid neighbours, the parent and the four children.
    pub fn neighbours(&self, i: usize, out: &mut Vec<usize>) {
        let (x, y, z) = self.coords(i);
        let s = self.side(z);
        if x > 0 {
            out.push(self.index(x - 1, y, z));
        }
        if x + 1 < s {
            out.push(self.index(x + 1, y, z));
        }
        if y > 0 {
            out.push(self.index(x, y - 1, z));
        }
        if y + 1 < s {
            out.push(self.index(x, y + 1, z));
        }
        if z < self.height {
            out.push(self.index(x / 2, y / 2, z + 1));
        }
        if z > 0 {
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                out.push(self.index(2 * x + dx, 2 * y + dy, z - 1));
            }
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut nb = Vec::new();
        for i in 0..self.size() {
            nb.clear();
            self.neighbours(i, &mut nb);
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }
}

/// Stacks a quadtree on a square labelled grid. Pyramid nodes carry only the
/// parameter block.
pub fn build_pyramid(base: &[Vec<NodeLabel>], params: &Params) -> Result<LabelledGraph> {
    let side = base.len();
    if base.iter().any(|row| row.len() != side) {
        return Err(Error::Input("pyramid base is not square".into()));
    }
    let shape = PyramidShape::for_side(side)?;
    if shape.size() as u64 > node_cap() {
        return Err(Error::Resource { what: "nodes".into(), limit: node_cap(), reached: shape.size() as u64 });
    }
    let mut labels = Vec::with_capacity(shape.size());
    for row in base {
        labels.extend(row.iter().cloned());
    }
    labels.resize(shape.size(), NodeLabel::new(params.clone(), Role::PyramidNode));
    LabelledGraph::new(labels, &shape.edges())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphView;

    fn base(side: usize) -> Vec<Vec<NodeLabel>> {
        (0..side).map(|y| (0..side).map(|x| NodeLabel::opaque((y * side + x) as u64)).collect()).collect()
    }

    #[test]
    fn small_pyramids() {
        let g = build_pyramid(&base(1), &Params::None).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        let g = build_pyramid(&base(2), &Params::None).unwrap();
        assert_eq!(g.node_count(), 5);
        // 4 grid edges on the base, 4 upward edges
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.degree(4), 4);
        let g = build_pyramid(&base(4), &Params::None).unwrap();
        assert_eq!(g.node_count(), 21);
    }

    #[test]
    fn sizes_match_geometric_sum() {
        for h in 0..8u32 {
            let s = PyramidShape::new(h);
            let sum: usize = (0..=h).map(|z| 4usize.pow(z)).sum();
            assert_eq!(s.size(), sum);
        }
    }

    #[test]
    fn upward_edges_follow_ceiling_rule() {
        // 1-based (x, y, z) goes up to (ceil(x/2), ceil(y/2), z+1)
        let s = PyramidShape::new(3);
        for i in 0..s.size() {
            let (x, y, z) = s.coords(i);
            assert_eq!(s.index(x, y, z), i);
            let up = s.parent(i).map(|p| s.coords(p));
            if z == 3 {
                assert_eq!(up, None);
                assert_eq!(i, s.apex());
            } else {
                let (x1, y1) = (x + 1, y + 1);
                let want = (x1.div_ceil(2) - 1, y1.div_ceil(2) - 1, z + 1);
                assert_eq!(up, Some(want));
            }
        }
    }

    #[test]
    fn rejects_bad_bases() {
        assert!(matches!(build_pyramid(&base(3), &Params::None), Err(Error::Input(_))));
        let mut b = base(2);
        b[1].pop();
        assert!(matches!(build_pyramid(&b, &Params::None), Err(Error::Input(_))));
    }

    #[test]
    fn every_non_apex_node_has_one_parent() {
        let s = PyramidShape::new(2);
        let g = build_pyramid(&base(4), &Params::None).unwrap();
        for i in 0..s.size() {
            let (_, _, z) = s.coords(i);
            let ups = g.neighbours(i).into_iter().filter(|&j| s.coords(j).2 == z + 1).count();
            assert_eq!(ups, usize::from(z < 2));
        }
    }
}
