//! Fragment collections `C(M, r)`: every labelled square grid of a fixed size
//! whose 2x2 windows follow the transition relation, with at most one head
//! per row, in all nine mod-3 orientations.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{fragment_cap, Error, Result};
use crate::turing::{Arrival, Cell, CellContent, Head, Move, TuringMachine};

pub type Row = Vec<CellContent>;

/// Flat fragments are `3r x 3r`; pyramidal ones have a `2^{3r}` base and a
/// quadtree of height `3r` on top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    Flat,
    Pyramidal,
}

impl Form {
    pub fn width(self, r: u32) -> Result<usize> {
        if r == 0 {
            return Err(Error::Input("fragments need r >= 1".into()));
        }
        match self {
            Form::Flat => Ok(3 * r as usize),
            Form::Pyramidal if 3 * r < 16 => Ok(1usize << (3 * r)),
            Form::Pyramidal => Err(Error::Resource { what: "fragment side".into(), limit: 1 << 15, reached: u64::MAX }),
        }
    }

    pub fn pyramid_height(self, r: u32) -> u32 {
        match self {
            Form::Flat => 0,
            Form::Pyramidal => 3 * r,
        }
    }
}

/// Which borders are non-natural (and therefore glued). The top row always is.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BorderFlags {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
}

impl BorderFlags {
    pub fn glued(&self, w: usize, x: usize, y: usize) -> bool {
        y == 0 || (self.left && x == 0) || (self.right && x + 1 == w) || (self.bottom && y + 1 == w)
    }

    pub fn glued_positions(&self, w: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..w {
            for x in 0..w {
                if self.glued(w, x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fragment {
    pub width: usize,
    /// Mod-3 coordinates of the top-left cell.
    pub ox: u8,
    pub oy: u8,
    pub rows: Vec<Row>,
    pub flags: BorderFlags,
}

impl Fragment {
    pub fn content(&self, x: usize, y: usize) -> CellContent {
        self.rows[y][x]
    }

    pub fn cell(&self, x: usize, y: usize) -> Cell {
        let c = self.rows[y][x];
        Cell {
            xm: ((self.ox as usize + x) % 3) as u8,
            ym: ((self.oy as usize + y) % 3) as u8,
            symbol: c.symbol,
            head: c.head,
        }
    }

    pub fn glued(&self, x: usize, y: usize) -> bool {
        self.flags.glued(self.width, x, y)
    }

    /// The labelled non-natural borders.
    pub fn border(&self) -> Border {
        let cells = self.flags.glued_positions(self.width).into_iter().map(|(x, y)| ((x, y), self.rows[y][x])).collect();
        Border { width: self.width, ox: self.ox, oy: self.oy, flags: self.flags, cells }
    }

    pub fn is_window_consistent(&self, m: &TuringMachine) -> bool {
        grid_consistent(m, &self.rows)
    }
}

/// Non-natural border cells of a fragment, keyed by `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Border {
    pub width: usize,
    pub ox: u8,
    pub oy: u8,
    pub flags: BorderFlags,
    pub cells: BTreeMap<(usize, usize), CellContent>,
}

fn head_of(row: &[CellContent]) -> Option<(usize, Head)> {
    row.iter().enumerate().find_map(|(x, c)| c.head.map(|h| (x, h)))
}

fn head_count(row: &[CellContent]) -> usize {
    row.iter().filter(|c| c.head.is_some()).count()
}

/// Every content-valid row of width `w` with at most one head.
pub fn rows_with_at_most_one_head(m: &TuringMachine, w: usize) -> Vec<Row> {
    let k = m.num_symbols();
    let heads = m.head_labels();
    let mut symbol_rows: Vec<Vec<u16>> = vec![Vec::new()];
    for _ in 0..w {
        symbol_rows = symbol_rows
            .into_iter()
            .flat_map(|r| {
                (0..k as u16).map(move |a| {
                    let mut r = r.clone();
                    r.push(a);
                    r
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for syms in &symbol_rows {
        let base: Row = syms.iter().map(|&a| CellContent { symbol: a, head: None }).collect();
        out.push(base.clone());
        for x in 0..w {
            for &h in &heads {
                let mut row = base.clone();
                row[x].head = Some(h);
                out.push(row);
            }
        }
    }
    out
}

/// The row below `row` as forced by the head inside it (if any).
pub fn forced_successor(m: &TuringMachine, row: &[CellContent]) -> Row {
    let w = row.len();
    let mut next: Row = row.iter().map(|c| CellContent { symbol: c.symbol, head: None }).collect();
    if let Some((x, h)) = head_of(row) {
        if m.is_halting(h.state) {
            next[x].head = Some(Head { state: h.state, arrival: Arrival::Stay });
        } else {
            let t = m.transition(h.state, row[x].symbol).expect("total on non-halting states");
            next[x].symbol = t.write;
            let (target, arrival) = match t.dir {
                Move::L => (x.checked_sub(1), Arrival::FromRight),
                Move::R => (Some(x + 1).filter(|&y| y < w), Arrival::FromLeft),
            };
            if let Some(y) = target {
                next[y].head = Some(Head { state: t.next, arrival });
            }
        }
    }
    next
}

/// All rows that may follow `row`: the forced row, plus heads entering
/// through the sides when no head remains inside.
pub fn successors(m: &TuringMachine, row: &[CellContent]) -> Vec<Row> {
    let forced = forced_successor(m, row);
    let mut out = vec![forced.clone()];
    if head_count(&forced) == 0 {
        let w = forced.len();
        for h in m.head_labels() {
            match h.arrival {
                Arrival::FromLeft => {
                    let mut r = forced.clone();
                    r[0].head = Some(h);
                    out.push(r);
                }
                Arrival::FromRight => {
                    let mut r = forced.clone();
                    r[w - 1].head = Some(h);
                    out.push(r);
                }
                _ => {}
            }
        }
    }
    out
}

/// Window consistency, content validity and the one-head-per-row rule.
pub fn grid_consistent(m: &TuringMachine, rows: &[Row]) -> bool {
    let h = rows.len();
    if rows.iter().any(|r| head_count(r) > 1 || r.iter().any(|&c| !m.content_ok(c))) {
        return false;
    }
    for y in 0..h.saturating_sub(1) {
        let (a, b) = (&rows[y], &rows[y + 1]);
        if a.len() != b.len() {
            return false;
        }
        for x in 0..a.len().saturating_sub(1) {
            if !m.window_ok(a[x], a[x + 1], b[x], b[x + 1]) {
                return false;
            }
        }
    }
    true
}

/// All `w x w` content grids, by row-by-row propagation.
pub fn enumerate_grids(m: &TuringMachine, w: usize, cap: u64) -> Result<Vec<Vec<Row>>> {
    let mut out = Vec::new();
    let mut stack: Vec<Row> = Vec::with_capacity(w);
    fn extend(m: &TuringMachine, w: usize, cap: u64, stack: &mut Vec<Row>, out: &mut Vec<Vec<Row>>) -> Result<()> {
        if stack.len() == w {
            if out.len() as u64 >= cap {
                return Err(Error::Resource { what: "fragment grids".into(), limit: cap, reached: out.len() as u64 + 1 });
            }
            out.push(stack.clone());
            return Ok(());
        }
        for next in successors(m, stack.last().unwrap()) {
            stack.push(next);
            extend(m, w, cap, stack, out)?;
            stack.pop();
        }
        Ok(())
    }
    for top in rows_with_at_most_one_head(m, w) {
        stack.push(top);
        extend(m, w, cap, &mut stack, &mut out)?;
        stack.pop();
    }
    Ok(out)
}

/// Naturalness of the left, right and bottom borders (before splitting).
pub fn classify_borders(m: &TuringMachine, rows: &[Row]) -> BorderFlags {
    let w = rows[0].len();
    let arrives = |c: CellContent, a: Arrival| matches!(c.head, Some(h) if h.arrival == a);
    let left = rows.iter().any(|r| arrives(r[0], Arrival::FromLeft) || m.moves(r[0], Move::L));
    let right = rows.iter().any(|r| arrives(r[w - 1], Arrival::FromRight) || m.moves(r[w - 1], Move::R));
    let bottom = rows.last().unwrap().iter().any(|c| matches!(c.head, Some(h) if !m.is_halting(h.state)));
    BorderFlags { left, right, bottom }
}

/// Flag sets under which a grid appears in the collection: one, or two
/// variants when exactly the top and bottom are non-natural.
pub fn flag_variants(natural: BorderFlags) -> Vec<BorderFlags> {
    if natural.bottom && !natural.left && !natural.right {
        vec![BorderFlags { left: true, ..natural }, BorderFlags { right: true, ..natural }]
    } else {
        vec![natural]
    }
}

/// Builds `C(M, r)` in the requested form, sorted.
pub fn build_fragments(m: &TuringMachine, r: u32, form: Form) -> Result<Vec<Fragment>> {
    let w = form.width(r)?;
    let cap = fragment_cap();
    let grids = enumerate_grids(m, w, cap)?;
    let mut out = Vec::new();
    for rows in &grids {
        let variants = flag_variants(classify_borders(m, rows));
        for oy in 0..3u8 {
            for ox in 0..3u8 {
                for &flags in &variants {
                    if out.len() as u64 >= cap {
                        return Err(Error::Resource {
                            what: "fragments".into(),
                            limit: cap,
                            reached: out.len() as u64 + 1,
                        });
                    }
                    out.push(Fragment { width: w, ox, oy, rows: rows.clone(), flags });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

type CacheKey = (Vec<u8>, u32, Form);

/// Memoized [`build_fragments`].
pub fn fragments_cached(m: &TuringMachine, r: u32, form: Form) -> Result<Arc<Vec<Fragment>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Vec<Fragment>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (m.encoded().to_vec(), r, form);
    if let Some(f) = cache.lock().unwrap().get(&key) {
        return Ok(f.clone());
    }
    let built = Arc::new(build_fragments(m, r, form)?);
    cache.lock().unwrap().insert(key, built.clone());
    Ok(built)
}

fn reconstruction(msg: impl Into<String>) -> Error {
    Error::Reconstruction(msg.into())
}

/// Rebuilds the fragment whose non-natural borders are `border`, by
/// propagating rows from the top and taking side entries from glued columns.
pub fn reconstruct_from_border(m: &TuringMachine, border: &Border) -> Result<Fragment> {
    let w = border.width;
    if w < 2 {
        return Err(reconstruction("fragment width below 2"));
    }
    let expected = border.flags.glued_positions(w);
    if expected.len() != border.cells.len() || expected.iter().any(|p| !border.cells.contains_key(p)) {
        return Err(reconstruction("border cells do not match the declared non-natural borders"));
    }
    if border.cells.values().any(|&c| !m.content_ok(c)) {
        return Err(reconstruction("invalid cell label on the border"));
    }
    let top: Row = (0..w).map(|x| border.cells[&(x, 0)]).collect();
    if head_count(&top) > 1 {
        return Err(reconstruction("two heads in the top row"));
    }
    let mut rows = vec![top];
    for y in 1..w {
        let mut next = forced_successor(m, &rows[y - 1]);
        if head_count(&next) == 0 {
            let entry = |x: usize, side: bool, a: Arrival| -> Option<Head> {
                if !side {
                    return None;
                }
                border.cells[&(x, y)].head.filter(|h| h.arrival == a)
            };
            match (entry(0, border.flags.left, Arrival::FromLeft), entry(w - 1, border.flags.right, Arrival::FromRight)) {
                (Some(_), Some(_)) => return Err(reconstruction(format!("two heads enter row {y}"))),
                (Some(h), None) => next[0].head = Some(h),
                (None, Some(h)) => next[w - 1].head = Some(h),
                (None, None) => {}
            }
        }
        rows.push(next);
    }
    for (&(x, y), &c) in &border.cells {
        if rows[y][x] != c {
            return Err(reconstruction(format!("border cell ({x},{y}) contradicts the propagated rows")));
        }
    }
    if !grid_consistent(m, &rows) {
        return Err(reconstruction("propagated rows violate the transition relation"));
    }
    if !flag_variants(classify_borders(m, &rows)).contains(&border.flags) {
        return Err(reconstruction("declared non-natural borders do not match the fragment"));
    }
    Ok(Fragment { width: w, ox: border.ox % 3, oy: border.oy % 3, rows, flags: border.flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turing::fixtures;
    use std::collections::BTreeSet;

    /// Independent count of `w x w` grids: every row with at most one head,
    /// chained by pairwise window compatibility. No propagation involved.
    fn brute_force_count(m: &TuringMachine, w: usize) -> usize {
        let mut cells = vec![];
        for a in 0..m.num_symbols() as u16 {
            cells.push(CellContent { symbol: a, head: None });
            for q in 0..m.num_states() as u16 {
                for arrival in Arrival::ALL {
                    let c = CellContent { symbol: a, head: Some(Head { state: q, arrival }) };
                    if m.content_ok(c) {
                        cells.push(c);
                    }
                }
            }
        }
        let mut rows: Vec<Row> = vec![vec![]];
        for _ in 0..w {
            rows = rows
                .into_iter()
                .flat_map(|r| {
                    cells.iter().map(move |&c| {
                        let mut r = r.clone();
                        r.push(c);
                        r
                    })
                })
                .collect();
        }
        rows.retain(|r| r.iter().filter(|c| c.head.is_some()).count() <= 1);
        let compatible = |a: &Row, b: &Row| (0..w - 1).all(|x| m.window_ok(a[x], a[x + 1], b[x], b[x + 1]));
        let n = rows.len();
        let next: Vec<Vec<usize>> =
            (0..n).map(|i| (0..n).filter(|&j| compatible(&rows[i], &rows[j])).collect()).collect();
        let mut ways = vec![1usize; n];
        for _ in 1..w {
            ways = (0..n).map(|i| next[i].iter().map(|&j| ways[j]).sum()).collect();
        }
        ways.iter().sum()
    }

    #[test]
    fn propagation_matches_brute_force() {
        for m in [fixtures::halt0(), fixtures::walker(), fixtures::busy_beaver2(), fixtures::looping()] {
            let grids = enumerate_grids(&m, 3, u64::MAX).unwrap();
            assert_eq!(grids.len(), brute_force_count(&m, 3), "{}", m.name());
            let distinct: BTreeSet<_> = grids.iter().collect();
            assert_eq!(distinct.len(), grids.len());
        }
    }

    #[test]
    fn every_fragment_is_window_consistent() {
        let m = fixtures::busy_beaver2();
        for f in build_fragments(&m, 1, Form::Flat).unwrap() {
            assert!(f.is_window_consistent(&m));
        }
    }

    #[test]
    fn flat_collection_counts_variants_and_offsets() {
        let m = fixtures::halt0();
        let grids = enumerate_grids(&m, 3, u64::MAX).unwrap();
        let variants: usize = grids.iter().map(|g| flag_variants(classify_borders(&m, g)).len()).sum();
        assert_eq!(build_fragments(&m, 1, Form::Flat).unwrap().len(), 9 * variants);
    }

    #[test]
    fn naturalness_examples() {
        let m = fixtures::walker();
        let blank = CellContent { symbol: 0, head: None };
        let rows = vec![vec![blank; 3]; 3];
        assert_eq!(classify_borders(&m, &rows), BorderFlags::default());

        // state `s` at the bottom is non-halting
        let mut rows = vec![vec![blank; 3]; 3];
        rows[0][1].head = Some(Head { state: 0, arrival: Arrival::Start });
        rows[1][2].head = Some(Head { state: 1, arrival: Arrival::FromLeft });
        rows[2][1].head = Some(Head { state: 2, arrival: Arrival::FromRight });
        assert!(grid_consistent(&m, &rows));
        assert_eq!(classify_borders(&m, &rows), BorderFlags { left: false, right: false, bottom: true });
        assert_eq!(flag_variants(classify_borders(&m, &rows)).len(), 2);

        // `a` on the left column moves left out of the fragment
        let mut rows = vec![vec![blank; 3]; 3];
        rows[0][0].head = Some(Head { state: 1, arrival: Arrival::FromLeft });
        let rows: Vec<Row> = vec![rows[0].clone(), forced_successor(&m, &rows[0]), vec![blank; 3]];
        assert!(grid_consistent(&m, &rows));
        assert!(classify_borders(&m, &rows).left);
    }

    #[test]
    fn border_round_trip_on_full_collections() {
        for (m, form) in [
            (fixtures::busy_beaver2(), Form::Flat),
            (fixtures::walker(), Form::Flat),
            (fixtures::halt0(), Form::Pyramidal),
        ] {
            for f in build_fragments(&m, 1, form).unwrap() {
                assert_eq!(reconstruct_from_border(&m, &f.border()).unwrap(), f);
            }
        }
    }

    #[test]
    fn blank_border_reconstructs_blank_fragment() {
        let m = fixtures::busy_beaver2();
        let blank = CellContent { symbol: 0, head: None };
        let cells = (0..3).map(|x| ((x, 0), blank)).collect();
        let b = Border { width: 3, ox: 0, oy: 0, flags: BorderFlags::default(), cells };
        let f = reconstruct_from_border(&m, &b).unwrap();
        assert!(f.rows.iter().flatten().all(|&c| c == blank));
    }

    #[test]
    fn contradictory_borders_fail() {
        let m = fixtures::busy_beaver2();
        let blank = CellContent { symbol: 0, head: None };
        let a = CellContent { symbol: 0, head: Some(Head { state: 0, arrival: Arrival::Start }) };
        let mut cells: BTreeMap<_, _> = (0..3).map(|x| ((x, 0), blank)).collect();
        cells.insert((0, 0), a);
        cells.insert((2, 0), a);
        let b = Border { width: 3, ox: 0, oy: 0, flags: BorderFlags::default(), cells };
        assert!(matches!(reconstruct_from_border(&m, &b), Err(Error::Reconstruction(_))));
        // a declared natural left border cannot hide an entering head
        let f = build_fragments(&m, 1, Form::Flat)
            .unwrap()
            .into_iter()
            .find(|f| f.flags.left && !f.flags.bottom && !f.flags.right)
            .unwrap();
        let mut border = f.border();
        border.flags.left = false;
        border.cells.retain(|&(x, y), _| y == 0 || x != 0);
        assert!(reconstruct_from_border(&m, &border).map_or(true, |g| g != f));
    }

    #[test]
    fn cap_reports_partial_count() {
        let m = fixtures::busy_beaver2();
        match enumerate_grids(&m, 3, 10) {
            Err(Error::Resource { limit, reached, .. }) => assert_eq!((limit, reached), (10, 11)),
            other => panic!("{other:?}"),
        }
    }
}
