//! A periodic grid with a one-level quadtree satisfies every cell rule but
//! has no finite pyramid; the checker must still reject it.

use std::sync::Arc;

use locdec::graph::{GraphView, LabelledGraph, NodeLabel, Params, Role};
use locdec::table::checker::check_graph;
use locdec::turing::{fixtures, Cell};

fn torus(side: usize) -> LabelledGraph {
    let m = Arc::new(fixtures::halt0());
    let params = Params::Table { machine: m.clone(), r: 1 };
    let blank = m.blank_content();
    let half = side / 2;
    let cell = |x: usize, y: usize| y * side + x;
    let parent = |x: usize, y: usize| side * side + (y / 2) * half + x / 2;
    let mut labels: Vec<NodeLabel> = Vec::new();
    for y in 0..side {
        for x in 0..side {
            labels.push(NodeLabel::new(params.clone(), Role::TableCell(Cell::new(x, y, blank))));
        }
    }
    labels.extend((0..half * half).map(|_| NodeLabel::new(params.clone(), Role::PyramidNode)));
    let mut edges = Vec::new();
    for y in 0..side {
        for x in 0..side {
            edges.push((cell(x, y), cell((x + 1) % side, y)));
            edges.push((cell(x, y), cell(x, (y + 1) % side)));
            edges.push((cell(x, y), parent(x, y)));
        }
    }
    for y in 0..half {
        for x in 0..half {
            let p = side * side + y * half + x;
            edges.push((p, side * side + y * half + (x + 1) % half));
            edges.push((p, side * side + ((y + 1) % half) * half + x));
        }
    }
    LabelledGraph::new(labels, &edges).unwrap()
}

#[test]
fn periodic_grid_is_rejected() {
    let g = torus(6);
    assert_eq!(g.node_count(), 36 + 9);
    let bad = check_graph(&g);
    assert!(!bad.is_empty());
}

#[test]
fn larger_torus_is_rejected() {
    assert!(!check_graph(&torus(12)).is_empty());
}
