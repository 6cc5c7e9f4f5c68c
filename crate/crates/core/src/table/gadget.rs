//! The glued graph `G(M, r)`: the pyramidal execution table, one pyramid per
//! fragment, and glue edges from every non-natural border cell to the pivot.
//!
//! The graph is implicit. Node `0` is the pivot (table cell `(0, 0)`), the
//! table pyramid follows, then the fragment pyramids in collection order.

use std::sync::Arc;

use crate::error::{node_cap, Error, Result};
use crate::graph::{GraphView, LabelledGraph, NodeLabel, Params, Role};
use crate::table::fragments::{fragments_cached, Form, Fragment};
use crate::table::pyramid::PyramidShape;
use crate::turing::{execution_table_with_budget, pad_to_power_of_two, Cell, CellContent, TuringMachine};

/// Default number of steps `build_g` waits for the machine to halt.
pub const GADGET_STEP_BUDGET: u64 = 1 << 12;

/// Where a node sits: component `0` is the table, `k >= 1` is fragment `k-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub component: usize,
    pub x: usize,
    pub y: usize,
    pub z: u32,
}

pub struct Gadget {
    params: Params,
    machine: Arc<TuringMachine>,
    table: Vec<Vec<CellContent>>,
    table_shape: PyramidShape,
    fragments: Arc<Vec<Fragment>>,
    frag_shape: PyramidShape,
    pivot_glue: Vec<usize>,
}

impl Gadget {
    /// Glues `fragments` to a square power-of-two `table`.
    pub fn new(
        machine: Arc<TuringMachine>,
        r: u32,
        table: Vec<Vec<CellContent>>,
        fragments: Arc<Vec<Fragment>>,
    ) -> Result<Self> {
        let table_shape = PyramidShape::for_side(table.len())?;
        if table.iter().any(|row| row.len() != table.len()) {
            return Err(Error::Input("table is not square".into()));
        }
        let width = fragments.first().map_or(1, |f| f.width);
        let frag_shape = PyramidShape::for_side(width)?;
        if fragments.iter().any(|f| f.width != width) {
            return Err(Error::Input("fragments of mixed widths".into()));
        }
        let total = table_shape.size() as u64 + fragments.len() as u64 * frag_shape.size() as u64;
        if total > node_cap() {
            return Err(Error::Resource { what: "nodes".into(), limit: node_cap(), reached: total });
        }
        let mut g = Gadget {
            params: Params::Table { machine: machine.clone(), r },
            machine,
            table,
            table_shape,
            fragments,
            frag_shape,
            pivot_glue: Vec::new(),
        };
        let mut glue = Vec::new();
        for (k, f) in g.fragments.iter().enumerate() {
            for (x, y) in f.flags.glued_positions(f.width) {
                glue.push(g.index(Location { component: k + 1, x, y, z: 0 }));
            }
        }
        g.pivot_glue = glue;
        Ok(g)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn machine(&self) -> &Arc<TuringMachine> {
        &self.machine
    }

    pub fn r(&self) -> u32 {
        match self.params {
            Params::Table { r, .. } => r,
            _ => unreachable!(),
        }
    }

    pub fn table(&self) -> &[Vec<CellContent>] {
        &self.table
    }

    pub fn table_shape(&self) -> PyramidShape {
        self.table_shape
    }

    pub fn fragment_shape(&self) -> PyramidShape {
        self.frag_shape
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn pivot(&self) -> usize {
        0
    }

    pub fn glue_endpoints(&self) -> &[usize] {
        &self.pivot_glue
    }

    pub fn locate(&self, u: usize) -> Location {
        let ts = self.table_shape.size();
        if u < ts {
            let (x, y, z) = self.table_shape.coords(u);
            return Location { component: 0, x, y, z };
        }
        let fs = self.frag_shape.size();
        let k = (u - ts) / fs;
        let (x, y, z) = self.frag_shape.coords((u - ts) % fs);
        Location { component: k + 1, x, y, z }
    }

    pub fn index(&self, loc: Location) -> usize {
        if loc.component == 0 {
            self.table_shape.index(loc.x, loc.y, loc.z)
        } else {
            self.table_shape.size()
                + (loc.component - 1) * self.frag_shape.size()
                + self.frag_shape.index(loc.x, loc.y, loc.z)
        }
    }

    fn component_base(&self, component: usize) -> usize {
        self.index(Location { component, x: 0, y: 0, z: 0 })
    }

    pub fn cell_at(&self, loc: Location) -> Option<Cell> {
        if loc.z != 0 {
            return None;
        }
        Some(if loc.component == 0 {
            Cell::new(loc.x, loc.y, self.table[loc.y][loc.x])
        } else {
            self.fragments[loc.component - 1].cell(loc.x, loc.y)
        })
    }

    pub fn is_glued(&self, loc: Location) -> bool {
        loc.component > 0 && loc.z == 0 && self.fragments[loc.component - 1].glued(loc.x, loc.y)
    }

    pub fn materialize(&self) -> Result<LabelledGraph> {
        LabelledGraph::materialize(self)
    }
}

impl GraphView for Gadget {
    fn node_count(&self) -> usize {
        self.table_shape.size() + self.fragments.len() * self.frag_shape.size()
    }

    fn label(&self, u: usize) -> NodeLabel {
        let role = match self.cell_at(self.locate(u)) {
            Some(c) => Role::TableCell(c),
            None => Role::PyramidNode,
        };
        NodeLabel::new(self.params.clone(), role)
    }

    fn neighbours(&self, u: usize) -> Vec<usize> {
        let loc = self.locate(u);
        let mut out = Vec::new();
        let base = self.component_base(loc.component);
        let shape = if loc.component == 0 { self.table_shape } else { self.frag_shape };
        shape.neighbours(u - base, &mut out);
        for v in &mut out {
            *v += base;
        }
        if u == 0 {
            out.extend_from_slice(&self.pivot_glue);
        } else if self.is_glued(loc) {
            out.push(0);
        }
        out
    }

    fn degree(&self, u: usize) -> usize {
        if u == 0 {
            let mut nb = Vec::new();
            self.table_shape.neighbours(0, &mut nb);
            nb.len() + self.pivot_glue.len()
        } else {
            self.neighbours(u).len()
        }
    }
}

/// `G(M, r)` for a machine that halts within `budget` steps.
pub fn build_g_with_budget(m: &TuringMachine, r: u32, budget: u64) -> Result<Gadget> {
    let table = pad_to_power_of_two(m, &execution_table_with_budget(m, budget)?);
    let rows = (0..table.size()).map(|y| table.row(y).iter().map(|c| c.content()).collect()).collect();
    let fragments = fragments_cached(m, r, Form::Pyramidal)?;
    Gadget::new(Arc::new(m.clone()), r, rows, fragments)
}

pub fn build_g(m: &TuringMachine, r: u32) -> Result<Gadget> {
    build_g_with_budget(m, r, GADGET_STEP_BUDGET)
}

/// Searches for an induced, label-preserving copy of the padded execution
/// table grid inside `g`. Returns the image of each cell in row-major order.
pub fn embed_table(m: &TuringMachine, g: &LabelledGraph) -> Result<Option<Vec<usize>>> {
    let t = pad_to_power_of_two(m, &crate::turing::execution_table(m)?);
    let n = t.size();
    let want: Vec<Cell> = t.cells().to_vec();
    let adjacent = |a: usize, b: usize| {
        let (ax, ay, bx, by) = (a % n, a / n, b % n, b / n);
        ax.abs_diff(bx) + ay.abs_diff(by) == 1
    };
    let label_ok = |u: usize, i: usize| g.label_ref(u).role == Role::TableCell(want[i]);
    let mut image: Vec<usize> = Vec::with_capacity(n * n);
    let mut used = std::collections::HashSet::new();

    fn extend(
        g: &LabelledGraph,
        n: usize,
        image: &mut Vec<usize>,
        used: &mut std::collections::HashSet<usize>,
        label_ok: &dyn Fn(usize, usize) -> bool,
        adjacent: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        let i = image.len();
        if i == n * n {
            return true;
        }
        let candidates: Vec<usize> = if i == 0 {
            (0..g.node_count()).collect()
        } else {
            // cell i is adjacent to cell i-1 or i-n, both already placed
            let anchor = if i.is_multiple_of(n) { image[i - n] } else { image[i - 1] };
            g.adjacency(anchor).iter().map(|&v| v as usize).collect()
        };
        for u in candidates {
            if used.contains(&u) || !label_ok(u, i) {
                continue;
            }
            if (0..i).any(|j| adjacent(i, j) != g.has_edge(u, image[j])) {
                continue;
            }
            image.push(u);
            used.insert(u);
            if extend(g, n, image, used, label_ok, adjacent) {
                return true;
            }
            used.remove(&u);
            image.pop();
        }
        false
    }

    Ok(extend(g, n, &mut image, &mut used, &label_ok, &adjacent).then_some(image))
}
