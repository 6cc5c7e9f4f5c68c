//! Local structure checker for table gadgets.
//!
//! Every node inspects its radius-3 ball. Cells verify the grid, the
//! transition windows, the mod-3 orientation, their pyramid parent and the
//! glue pattern of fragment borders. The hub (the only cell with five or more
//! cell neighbours) additionally reconstructs every glued fragment from its
//! border and compares the result with the fragment collection. Pyramid nodes
//! compare a role-erased skeleton of their surroundings with a library
//! harvested from standalone pyramids.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::rc::Rc;
use std::sync::{Arc, OnceLock};

use crate::ball::{Ball, Handle, LazyBall, LocalView};
use crate::canon::{canonical_form, ClassMode, NeighbourhoodClass};
use crate::graph::{GraphView, LabelledGraph, NodeLabel, Params, Role};
use crate::local::{Coins, DeciderMode, LocalDecider, LocalOutput};
use crate::table::fragments::{fragments_cached, reconstruct_from_border, Border, BorderFlags, Form};
use crate::table::pyramid::PyramidShape;
use crate::turing::{Arrival, Cell, CellContent, Head, Move, TuringMachine};

pub const CHECK_HORIZON: usize = 3;

/// Standalone pyramids of heights `1..=LIBRARY_HEIGHT` seed the skeleton
/// library.
pub const LIBRARY_HEIGHT: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Dir {
    Right,
    Left,
    Down,
    Up,
}

impl Dir {
    fn of(from: Cell, to: Cell) -> Option<Dir> {
        let dx = (to.xm + 3 - from.xm) % 3;
        let dy = (to.ym + 3 - from.ym) % 3;
        match (dx, dy) {
            (1, 0) => Some(Dir::Right),
            (2, 0) => Some(Dir::Left),
            (0, 1) => Some(Dir::Down),
            (0, 2) => Some(Dir::Up),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Dir::Right => (1, 0),
            Dir::Left => (-1, 0),
            Dir::Down => (0, 1),
            Dir::Up => (0, -1),
        }
    }
}

/// Local facts about a non-hub cell.
struct Info {
    cell: Cell,
    glued: bool,
    grid: [Option<Handle>; 4],
    parents: Vec<Handle>,
}

impl Info {
    fn has(&self, d: Dir) -> bool {
        self.grid[d.slot()].is_some()
    }

    fn get(&self, d: Dir) -> Option<Handle> {
        self.grid[d.slot()]
    }

    fn grid_count(&self) -> usize {
        self.grid.iter().flatten().count()
    }
}

struct Ctx<'v> {
    view: &'v dyn LocalView,
    machine: Arc<TuringMachine>,
    r: u32,
    nbrs: RefCell<HashMap<Handle, Rc<Vec<Handle>>>>,
    labels: RefCell<HashMap<Handle, Role>>,
    hubs: RefCell<HashMap<Handle, bool>>,
    infos: RefCell<HashMap<Handle, Option<Rc<Info>>>>,
}

impl<'v> Ctx<'v> {
    fn role(&self, h: Handle) -> Role {
        if let Some(r) = self.labels.borrow().get(&h) {
            return *r;
        }
        let r = self.view.label(h).role;
        self.labels.borrow_mut().insert(h, r);
        r
    }

    fn cell(&self, h: Handle) -> Option<Cell> {
        self.role(h).cell()
    }

    fn is_cell(&self, h: Handle) -> bool {
        matches!(self.role(h), Role::TableCell(_))
    }

    fn neighbours(&self, h: Handle) -> Rc<Vec<Handle>> {
        if let Some(n) = self.nbrs.borrow().get(&h) {
            return n.clone();
        }
        let n = Rc::new(self.view.neighbours(h));
        self.nbrs.borrow_mut().insert(h, n.clone());
        n
    }

    /// Five or more cell neighbours (and a parent) marks the hub.
    fn is_hub(&self, h: Handle) -> bool {
        if let Some(&b) = self.hubs.borrow().get(&h) {
            return b;
        }
        let b = self.is_cell(h) && self.view.degree(h) >= 6 && {
            let mut count = 0;
            let deg = self.view.degree(h);
            let mut i = 0;
            while i < deg && count < 5 {
                if self.is_cell(self.view.neighbour(h, i)) {
                    count += 1;
                }
                i += 1;
            }
            count >= 5
        };
        self.hubs.borrow_mut().insert(h, b);
        b
    }

    fn info(&self, h: Handle) -> Option<Rc<Info>> {
        if let Some(i) = self.infos.borrow().get(&h) {
            return i.clone();
        }
        let i = self.compute_info(h).map(Rc::new);
        self.infos.borrow_mut().insert(h, i.clone());
        i
    }

    fn compute_info(&self, h: Handle) -> Option<Info> {
        let cell = self.cell(h)?;
        if self.is_hub(h) {
            return None;
        }
        let nbrs = self.neighbours(h);
        let table: Vec<Handle> = nbrs.iter().copied().filter(|&x| self.is_cell(x)).collect();
        let parents: Vec<Handle> = nbrs.iter().copied().filter(|&x| self.role(x) == Role::PyramidNode).collect();
        let mut grid = [None; 4];
        let mut glue = 0;
        for &x in &table {
            if self.is_hub(x) && table.iter().any(|&y| y != x && self.view.adjacent(y, x)) {
                glue += 1;
                continue;
            }
            let d = Dir::of(cell, self.cell(x)?)?;
            if grid[d.slot()].replace(x).is_some() {
                return None;
            }
        }
        if glue > 1 {
            return None;
        }
        Some(Info { cell, glued: glue == 1, grid, parents })
    }

    fn glued(&self, h: Handle) -> Option<bool> {
        if self.is_hub(h) {
            return Some(false);
        }
        Some(self.info(h)?.glued)
    }

    /// The unique pyramid parent's four cell children form an oriented,
    /// square-connected 2x2 block containing `child`.
    fn block_ok(&self, parent: Handle, child: Handle) -> bool {
        let kids: Vec<Handle> = self.neighbours(parent).iter().copied().filter(|&x| self.is_cell(x)).collect();
        if kids.len() != 4 || !kids.contains(&child) {
            return false;
        }
        let cells: Vec<Cell> = kids.iter().map(|&k| self.cell(k).unwrap()).collect();
        for tl in 0..4 {
            let (a, b) = (cells[tl].xm, cells[tl].ym);
            let want = [(a, b), ((a + 1) % 3, b), (a, (b + 1) % 3), ((a + 1) % 3, (b + 1) % 3)];
            let mut pos = [usize::MAX; 4];
            for (slot, &(x, y)) in want.iter().enumerate() {
                if let Some(k) = (0..4).find(|&k| cells[k].xm == x && cells[k].ym == y) {
                    pos[slot] = k;
                }
            }
            if pos.contains(&usize::MAX) || pos.iter().collect::<HashSet<_>>().len() != 4 {
                continue;
            }
            let adj = |i: usize, j: usize| self.view.adjacent(kids[pos[i]], kids[pos[j]]);
            return adj(0, 1) && adj(0, 2) && adj(1, 3) && adj(2, 3) && !adj(0, 3) && !adj(1, 2);
        }
        false
    }
}

fn content(c: Cell) -> CellContent {
    c.content()
}

fn params_of(view: &dyn LocalView) -> Option<(Params, Arc<TuringMachine>, u32)> {
    match view.label(0).params {
        p @ Params::Table { .. } => {
            let Params::Table { machine, r } = &p else { unreachable!() };
            let (machine, r) = (machine.clone(), *r);
            Some((p, machine, r))
        }
        _ => None,
    }
}

/// Runs the local structure check on a radius-3 view.
pub fn check_view(view: &dyn LocalView) -> bool {
    let Some((params, machine, r)) = params_of(view) else {
        return false;
    };
    if r == 0 || Form::Pyramidal.width(r).is_err() {
        return false;
    }
    let ctx = Ctx {
        view,
        machine,
        r,
        nbrs: RefCell::default(),
        labels: RefCell::default(),
        hubs: RefCell::default(),
        infos: RefCell::default(),
    };
    let nbrs = ctx.neighbours(0);
    for &v in nbrs.iter() {
        let l = view.label(v);
        if l.params != params || !matches!(l.role, Role::TableCell(_) | Role::PyramidNode) {
            return false;
        }
        ctx.labels.borrow_mut().insert(v, l.role);
    }
    match view.label(0).role {
        Role::TableCell(_) if ctx.is_hub(0) => check_hub(&ctx).is_some(),
        Role::TableCell(_) => check_cell(&ctx).is_some(),
        Role::PyramidNode => skeleton_library().contains(&skeleton_class(view)),
        _ => false,
    }
}

fn ensure(b: bool) -> Option<()> {
    b.then_some(())
}

fn check_cell(ctx: &Ctx) -> Option<()> {
    let m = &*ctx.machine;
    let me = ctx.info(0)?;
    let c = content(me.cell);
    ensure(m.content_ok(c))?;

    ensure(me.parents.len() == 1)?;
    let p = me.parents[0];
    ensure(ctx.block_ok(p, 0))?;

    for &v in me.grid.iter().flatten() {
        let parent = if ctx.is_hub(v) {
            let ps: Vec<Handle> =
                ctx.neighbours(v).iter().copied().filter(|&x| ctx.role(x) == Role::PyramidNode).collect();
            ensure(ps.len() == 1)?;
            ps[0]
        } else {
            let vi = ctx.info(v)?;
            ensure(vi.parents.len() == 1)?;
            vi.parents[0]
        };
        ensure(parent == p || ctx.view.adjacent(parent, p))?;
    }

    // square closure in every quadrant
    let mut diagonal = HashMap::new();
    for (a, b) in [(Dir::Right, Dir::Down), (Dir::Right, Dir::Up), (Dir::Left, Dir::Down), (Dir::Left, Dir::Up)] {
        let (Some(ha), Some(hb)) = (me.get(a), me.get(b)) else { continue };
        if ctx.is_hub(ha) || ctx.is_hub(hb) {
            continue;
        }
        let (ia, ib) = (ctx.info(ha)?, ctx.info(hb)?);
        let x = ia.get(b)?;
        ensure(ib.get(a) == Some(x) && x != 0)?;
        diagonal.insert((a, b), x);
    }

    // rectangularity
    for d in [Dir::Right, Dir::Left, Dir::Down, Dir::Up] {
        let Some(v) = me.get(d) else { continue };
        if ctx.is_hub(v) {
            continue;
        }
        let vi = ctx.info(v)?;
        let cross = if matches!(d, Dir::Right | Dir::Left) { [Dir::Up, Dir::Down] } else { [Dir::Left, Dir::Right] };
        for e in cross {
            ensure(vi.has(e) == me.has(e))?;
        }
    }

    // transition window with this cell at the top left
    if let (Some(rt), Some(dn)) = (me.get(Dir::Right), me.get(Dir::Down)) {
        let x = *diagonal.get(&(Dir::Right, Dir::Down))?;
        let cells = [ctx.cell(rt)?, ctx.cell(dn)?, ctx.cell(x)?];
        ensure(m.window_ok(c, cells[0].content(), cells[1].content(), cells[2].content()))?;
    }

    let glued = me.glued;
    let status = |h: Handle| ctx.glued(h);
    if me.grid_count() == 4 {
        ensure(!glued)?;
    }

    // top row
    if !me.has(Dir::Up) {
        if glued {
            for d in [Dir::Left, Dir::Right] {
                if let Some(v) = me.get(d) {
                    if !ctx.is_hub(v) {
                        ensure(status(v)?)?;
                    }
                }
            }
        } else {
            ensure(c == m.blank_content())?;
            let left = me.get(Dir::Left)?;
            ensure(ctx.is_hub(left) || !status(left)?)?;
            if let Some(rt) = me.get(Dir::Right) {
                ensure(!ctx.is_hub(rt) && !status(rt)?)?;
            }
        }
    }

    let middle = |i: &Info, a: Dir, b: Dir| i.has(a) && i.has(b);

    // left and right columns
    for side in [Dir::Left, Dir::Right] {
        if me.has(side) {
            continue;
        }
        if middle(&me, Dir::Up, Dir::Down) {
            for vert in [Dir::Up, Dir::Down] {
                let v = me.get(vert)?;
                if ctx.is_hub(v) {
                    ensure(!glued)?;
                    continue;
                }
                let vi = ctx.info(v)?;
                if middle(&vi, Dir::Up, Dir::Down) && !vi.has(side) {
                    ensure(vi.glued == glued)?;
                }
                if vert == Dir::Up && !vi.has(Dir::Up) && !vi.glued {
                    ensure(!glued)?;
                }
            }
        }
        if !me.has(Dir::Down) && me.has(Dir::Up) {
            let other = if side == Dir::Left { Dir::Right } else { Dir::Left };
            let glued_nbr = |d: Dir| -> Option<bool> {
                match me.get(d) {
                    Some(v) if !ctx.is_hub(v) => status(v),
                    _ => Some(false),
                }
            };
            ensure(glued == (glued_nbr(Dir::Up)? || glued_nbr(other)?))?;
        }
    }

    // bottom row
    if !me.has(Dir::Down) && middle(&me, Dir::Left, Dir::Right) {
        for d in [Dir::Left, Dir::Right] {
            let v = me.get(d)?;
            if ctx.is_hub(v) {
                continue;
            }
            let vi = ctx.info(v)?;
            if !vi.has(Dir::Down) && middle(&vi, Dir::Left, Dir::Right) {
                ensure(vi.glued == glued)?;
            }
        }
    }

    // a head crossing a border marks that border as glued
    let arrived = |a: Arrival| matches!(c.head, Some(h) if h.arrival == a);
    let column_glued = || -> Option<()> {
        ensure(glued)?;
        for d in [Dir::Up, Dir::Down] {
            if let Some(v) = me.get(d) {
                if !ctx.is_hub(v) {
                    ensure(status(v)?)?;
                }
            }
        }
        Some(())
    };
    if !me.has(Dir::Left) && (arrived(Arrival::FromLeft) || m.moves(c, Move::L)) {
        column_glued()?;
    }
    if !me.has(Dir::Right) && (arrived(Arrival::FromRight) || m.moves(c, Move::R)) {
        column_glued()?;
    }
    if !me.has(Dir::Down) && matches!(c.head, Some(h) if !m.is_halting(h.state)) {
        if middle(&me, Dir::Left, Dir::Right) {
            ensure(glued)?;
        } else {
            let v = me.get(Dir::Left).or(me.get(Dir::Right))?;
            ensure(!ctx.is_hub(v) && status(v)?)?;
        }
    }
    Some(())
}

fn check_hub(ctx: &Ctx) -> Option<()> {
    let m = &*ctx.machine;
    let me = ctx.cell(0)?;
    let c = me.content();
    ensure(me.xm == 0 && me.ym == 0)?;
    ensure(c.symbol == m.blank() && c.head == Some(Head { state: m.start(), arrival: Arrival::Start }))?;
    ensure(!m.moves(c, Move::L))?;

    let nbrs = ctx.neighbours(0);
    let table: Vec<Handle> = nbrs.iter().copied().filter(|&x| ctx.is_cell(x)).collect();
    let parents: Vec<Handle> = nbrs.iter().copied().filter(|&x| ctx.role(x) == Role::PyramidNode).collect();
    ensure(parents.len() == 1 && ctx.block_ok(parents[0], 0))?;
    let tset: HashSet<Handle> = table.iter().copied().collect();
    for &x in &table {
        ensure(!ctx.is_hub(x))?;
    }

    // components among the cell neighbours
    let mut comp_of: HashMap<Handle, usize> = HashMap::new();
    let mut comps: Vec<Vec<Handle>> = Vec::new();
    for &s in &table {
        if comp_of.contains_key(&s) {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp_of.insert(s, id);
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in ctx.neighbours(x).iter() {
                if tset.contains(&y) && !comp_of.contains_key(&y) {
                    comp_of.insert(y, id);
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        comps.push(members);
    }

    let singles: Vec<Handle> = comps.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
    ensure(singles.len() == 2)?;
    let find = |xm: u8, ym: u8| singles.iter().copied().find(|&s| ctx.cell(s).is_some_and(|c| c.xm == xm && c.ym == ym));
    let (rt, dn) = (find(1, 0)?, find(0, 1)?);
    let common: Vec<Handle> = ctx
        .neighbours(rt)
        .iter()
        .copied()
        .filter(|&x| x != 0 && ctx.view.adjacent(x, dn) && ctx.cell(x).is_some_and(|c| c.xm == 1 && c.ym == 1))
        .collect();
    ensure(common.len() == 1)?;
    ensure(m.window_ok(c, ctx.cell(rt)?.content(), ctx.cell(dn)?.content(), ctx.cell(common[0])?.content()))?;

    let w = Form::Pyramidal.width(ctx.r).ok()?;
    let mut rebuilt = Vec::new();
    for comp in comps.iter().filter(|c| c.len() > 1) {
        let border = border_of(ctx, comp, &comp_of, w)?;
        rebuilt.push(reconstruct_from_border(m, &border).ok()?);
    }
    rebuilt.sort();
    let expected = fragments_cached(m, ctx.r, Form::Pyramidal).ok()?;
    ensure(rebuilt.as_slice() == expected.as_slice())
}

/// Lays out one glued component on integer coordinates and reads it as a
/// fragment border.
fn border_of(ctx: &Ctx, comp: &[Handle], comp_of: &HashMap<Handle, usize>, w: usize) -> Option<Border> {
    let id = comp_of[&comp[0]];
    let mut at: HashMap<Handle, (i64, i64)> = HashMap::from([(comp[0], (0, 0))]);
    let mut queue = VecDeque::from([comp[0]]);
    while let Some(x) = queue.pop_front() {
        let (px, py) = at[&x];
        let cx = ctx.cell(x)?;
        for &y in ctx.neighbours(x).iter() {
            if comp_of.get(&y) != Some(&id) {
                continue;
            }
            let (dx, dy) = Dir::of(cx, ctx.cell(y)?)?.delta();
            let q = (px + dx, py + dy);
            match at.get(&y) {
                Some(&old) => ensure(old == q)?,
                None => {
                    at.insert(y, q);
                    queue.push_back(y);
                }
            }
        }
    }
    let minx = at.values().map(|p| p.0).min()?;
    let miny = at.values().map(|p| p.1).min()?;
    let mut cells = std::collections::BTreeMap::new();
    let mut handle_at = HashMap::new();
    for (&h, &(x, y)) in &at {
        let (x, y) = ((x - minx) as usize, (y - miny) as usize);
        ensure(x < w && y < w)?;
        ensure(cells.insert((x, y), ctx.cell(h)?).is_none())?;
        handle_at.insert((x, y), h);
    }
    let flags = BorderFlags {
        left: cells.contains_key(&(0, 1)),
        right: cells.contains_key(&(w - 1, 1)),
        bottom: cells.contains_key(&(1, w - 1)),
    };
    let positions: BTreeSet<(usize, usize)> = flags.glued_positions(w).into_iter().collect();
    ensure(positions.len() == cells.len() && cells.keys().all(|p| positions.contains(p)))?;
    let origin = cells[&(0, 0)];
    for (&(x, y), cell) in &cells {
        ensure(cell.xm as usize == (origin.xm as usize + x) % 3 && cell.ym as usize == (origin.ym as usize + y) % 3)?;
        // every coordinate-adjacent pair inside the border is an edge
        for (nx, ny) in [(x + 1, y), (x, y + 1)] {
            if let Some(&other) = handle_at.get(&(nx, ny)) {
                ensure(ctx.neighbours(handle_at[&(x, y)]).contains(&other))?;
            }
        }
    }
    Some(Border {
        width: w,
        ox: origin.xm,
        oy: origin.ym,
        flags,
        cells: cells.into_iter().map(|(p, c)| (p, c.content())).collect(),
    })
}

/// Role-erased surroundings of a pyramid node: pyramid nodes within distance
/// 2 and cells within distance 1, with induced edges.
pub fn skeleton(view: &dyn LocalView) -> Ball {
    let mut dist: HashMap<Handle, usize> = HashMap::from([(0, 0)]);
    let mut order = vec![0];
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du >= 2 {
            continue;
        }
        for v in view.neighbours(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                e.insert(du + 1);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    let keep: Vec<(Handle, NodeLabel)> = order
        .into_iter()
        .filter_map(|h| {
            let d = dist[&h];
            match view.label(h).role {
                Role::PyramidNode if d <= 2 => Some((h, NodeLabel::opaque(0))),
                Role::TableCell(_) if d <= 1 => Some((h, NodeLabel::opaque(1))),
                _ => None,
            }
        })
        .collect();
    let n = keep.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if view.adjacent(keep[i].0, keep[j].0) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut d = vec![usize::MAX; n];
    d[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if d[v] == usize::MAX {
                d[v] = d[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let labels = keep.into_iter().map(|(_, l)| l).collect();
    Ball::from_parts(2, labels, adj, d)
}

pub fn skeleton_class(view: &dyn LocalView) -> NeighbourhoodClass {
    canonical_form(&skeleton(view), ClassMode::Oblivious)
}

/// Skeleton classes of every pyramid node in standalone pyramids of heights
/// `heights`.
pub fn skeleton_classes(heights: std::ops::RangeInclusive<u32>) -> HashSet<NeighbourhoodClass> {
    let mut out = HashSet::new();
    for h in heights {
        let shape = PyramidShape::new(h);
        let cell = NodeLabel::new(Params::None, Role::TableCell(Cell::new(0, 0, CellContent { symbol: 0, head: None })));
        let mut labels = vec![cell; shape.base_side() * shape.base_side()];
        labels.resize(shape.size(), NodeLabel::new(Params::None, Role::PyramidNode));
        let g = LabelledGraph::new(labels, &shape.edges()).expect("pyramid is connected");
        for u in shape.offset(1)..shape.size() {
            out.insert(skeleton_class(&LazyBall::new(&g, None, u, CHECK_HORIZON)));
        }
    }
    out
}

pub fn skeleton_library() -> &'static HashSet<NeighbourhoodClass> {
    static LIB: OnceLock<HashSet<NeighbourhoodClass>> = OnceLock::new();
    LIB.get_or_init(|| skeleton_classes(1..=LIBRARY_HEIGHT))
}

/// The structure checker as an oblivious decider.
#[derive(Clone, Copy, Debug, Default)]
pub struct StructureChecker;

impl LocalDecider for StructureChecker {
    fn name(&self) -> String {
        "structure".into()
    }

    fn horizon(&self) -> usize {
        CHECK_HORIZON
    }

    fn mode(&self) -> DeciderMode {
        DeciderMode::Oblivious
    }

    fn decide(&self, view: &dyn LocalView, _coins: &mut Coins) -> LocalOutput {
        LocalOutput::from_bool(check_view(view))
    }
}

/// Runs the checker on every node; returns the rejecting nodes.
pub fn check_graph(g: &dyn GraphView) -> Vec<usize> {
    use rayon::prelude::*;
    (0..g.node_count())
        .into_par_iter()
        .filter(|&v| !check_view(&LazyBall::new(g, None, v, CHECK_HORIZON)))
        .collect()
}

pub fn check_node(g: &dyn GraphView, v: usize) -> bool {
    check_view(&LazyBall::new(g, None, v, CHECK_HORIZON))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::gadget::build_g;
    use crate::turing::fixtures;

    #[test]
    fn library_saturates() {
        assert_eq!(skeleton_classes(1..=6), skeleton_classes(1..=7));
    }

    #[test]
    fn halt0_gadget_passes() {
        let g = build_g(&fixtures::halt0(), 1).unwrap();
        assert_eq!(check_graph(&g), Vec::<usize>::new());
    }

    #[test]
    fn relabelled_cell_is_caught() {
        let g = build_g(&fixtures::halt0(), 1).unwrap().materialize().unwrap();
        for target in [0usize, 1, 3, 10, 200, 5000] {
            let mut h = g.clone();
            let mut l = h.label_ref(target).clone();
            match &mut l.role {
                Role::TableCell(c) => c.xm = (c.xm + 1) % 3,
                _ => continue,
            }
            h.set_label(target, l);
            let mut near: Vec<usize> = vec![target];
            near.extend(h.adjacency(target).iter().map(|&v| v as usize));
            assert!(near.iter().any(|&v| !check_node(&h, v)), "mutation at {target} missed");
        }
    }
}
