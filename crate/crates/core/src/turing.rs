//! Single-tape Turing machines on a right-infinite tape, their execution
//! tables, and the 2x2 window relation shared by tables and fragments.
//!
//! Output is encoded by the halting state: a machine "outputs 0" when it
//! enters `halt0` and "outputs 1" when it enters `halt1`.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StateId = u16;
pub type SymbolId = u16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub next: StateId,
    pub write: SymbolId,
    pub dir: Move,
}

/// JSON description of a machine.
///
/// `transitions` rows are `[state, read, next, write, "L"|"R"]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MachineSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub start: String,
    pub halt0: String,
    pub halt1: String,
    pub blank: String,
    pub alphabet: Vec<String>,
    pub transitions: Vec<(String, String, String, String, Move)>,
}

#[derive(Clone)]
pub struct TuringMachine {
    name: String,
    states: Vec<String>,
    alphabet: Vec<String>,
    start: StateId,
    halt0: StateId,
    halt1: StateId,
    blank: SymbolId,
    delta: Vec<Option<Transition>>,
    /// States entered by some right (resp. left) move.
    right_targets: Vec<bool>,
    left_targets: Vec<bool>,
    encoded: Vec<u8>,
}

impl PartialEq for TuringMachine {
    fn eq(&self, other: &Self) -> bool {
        self.encoded == other.encoded
    }
}
impl Eq for TuringMachine {}

impl Hash for TuringMachine {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.encoded.hash(state)
    }
}

impl fmt::Debug for TuringMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TuringMachine")
            .field("name", &self.name)
            .field("states", &self.states.len())
            .field("alphabet", &self.alphabet.len())
            .finish()
    }
}

fn index_of(names: &[String], name: &str, what: &str) -> Result<u16> {
    names
        .iter()
        .position(|s| s == name)
        .map(|i| i as u16)
        .ok_or_else(|| Error::Machine(format!("unknown {what} `{name}`")))
}

impl TuringMachine {
    pub fn from_spec(spec: &MachineSpec) -> Result<Self> {
        let uniq = |v: &[String], what: &str| -> Result<()> {
            let set: BTreeSet<&String> = v.iter().collect();
            if set.len() != v.len() {
                return Err(Error::Machine(format!("duplicate {what} names")));
            }
            if v.is_empty() {
                return Err(Error::Machine(format!("no {what}s")));
            }
            if v.len() > u16::MAX as usize {
                return Err(Error::Machine(format!("too many {what}s")));
            }
            Ok(())
        };
        uniq(&spec.states, "state")?;
        uniq(&spec.alphabet, "symbol")?;
        let start = index_of(&spec.states, &spec.start, "state")?;
        let halt0 = index_of(&spec.states, &spec.halt0, "state")?;
        let halt1 = index_of(&spec.states, &spec.halt1, "state")?;
        let blank = index_of(&spec.alphabet, &spec.blank, "symbol")?;
        if halt0 == halt1 {
            return Err(Error::Machine("halt0 and halt1 must differ".into()));
        }
        if start == halt0 || start == halt1 {
            return Err(Error::Machine("the start state must not be a halting state".into()));
        }
        let ns = spec.states.len();
        let na = spec.alphabet.len();
        let mut delta = vec![None; ns * na];
        for (q, a, p, b, dir) in &spec.transitions {
            let q = index_of(&spec.states, q, "state")?;
            let a = index_of(&spec.alphabet, a, "symbol")?;
            let p = index_of(&spec.states, p, "state")?;
            let b = index_of(&spec.alphabet, b, "symbol")?;
            if q == halt0 || q == halt1 {
                return Err(Error::Machine(format!(
                    "transition out of halting state `{}`",
                    spec.states[q as usize]
                )));
            }
            let slot = &mut delta[q as usize * na + a as usize];
            if slot.is_some() {
                return Err(Error::Machine(format!(
                    "duplicate transition for ({}, {})",
                    spec.states[q as usize], spec.alphabet[a as usize]
                )));
            }
            *slot = Some(Transition { next: p, write: b, dir: *dir });
        }
        for q in 0..ns as u16 {
            if q == halt0 || q == halt1 {
                continue;
            }
            for a in 0..na {
                if delta[q as usize * na + a].is_none() {
                    return Err(Error::Machine(format!(
                        "transition function not total: missing ({}, {})",
                        spec.states[q as usize], spec.alphabet[a]
                    )));
                }
            }
        }
        let mut right_targets = vec![false; ns];
        let mut left_targets = vec![false; ns];
        for t in delta.iter().flatten() {
            match t.dir {
                Move::R => right_targets[t.next as usize] = true,
                Move::L => left_targets[t.next as usize] = true,
            }
        }
        let mut m = TuringMachine {
            name: spec.name.clone().unwrap_or_else(|| "machine".into()),
            states: spec.states.clone(),
            alphabet: spec.alphabet.clone(),
            start,
            halt0,
            halt1,
            blank,
            delta,
            right_targets,
            left_targets,
            encoded: Vec::new(),
        };
        m.encoded = m.encode();
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MachineSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_spec(&self) -> MachineSpec {
        let na = self.alphabet.len();
        let mut transitions = Vec::new();
        for (i, t) in self.delta.iter().enumerate() {
            if let Some(t) = t {
                transitions.push((
                    self.states[i / na].clone(),
                    self.alphabet[i % na].clone(),
                    self.states[t.next as usize].clone(),
                    self.alphabet[t.write as usize].clone(),
                    t.dir,
                ));
            }
        }
        MachineSpec {
            name: Some(self.name.clone()),
            states: self.states.clone(),
            start: self.states[self.start as usize].clone(),
            halt0: self.states[self.halt0 as usize].clone(),
            halt1: self.states[self.halt1 as usize].clone(),
            blank: self.alphabet[self.blank as usize].clone(),
            alphabet: self.alphabet.clone(),
            transitions,
        }
    }

    /// Name-free binary encoding of the transition structure. Two machines
    /// with equal encodings behave identically and produce equal labels.
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let push16 = |out: &mut Vec<u8>, v: u16| out.extend_from_slice(&v.to_be_bytes());
        push16(&mut out, self.states.len() as u16);
        push16(&mut out, self.alphabet.len() as u16);
        push16(&mut out, self.start);
        push16(&mut out, self.halt0);
        push16(&mut out, self.halt1);
        push16(&mut out, self.blank);
        for t in &self.delta {
            match t {
                None => out.push(0),
                Some(t) => {
                    out.push(match t.dir {
                        Move::L => 1,
                        Move::R => 2,
                    });
                    push16(&mut out, t.next);
                    push16(&mut out, t.write);
                }
            }
        }
        out
    }

    pub fn encoded(&self) -> &[u8] {
        &self.encoded
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q as usize]
    }

    pub fn symbol_name(&self, a: SymbolId) -> &str {
        &self.alphabet[a as usize]
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn blank(&self) -> SymbolId {
        self.blank
    }

    pub fn halt0(&self) -> StateId {
        self.halt0
    }

    pub fn halt1(&self) -> StateId {
        self.halt1
    }

    pub fn is_halting(&self, q: StateId) -> bool {
        q == self.halt0 || q == self.halt1
    }

    pub fn output_of(&self, q: StateId) -> Option<u8> {
        if q == self.halt0 {
            Some(0)
        } else if q == self.halt1 {
            Some(1)
        } else {
            None
        }
    }

    pub fn transition(&self, q: StateId, a: SymbolId) -> Option<Transition> {
        self.delta[q as usize * self.alphabet.len() + a as usize]
    }

    pub fn is_right_target(&self, q: StateId) -> bool {
        self.right_targets[q as usize]
    }

    pub fn is_left_target(&self, q: StateId) -> bool {
        self.left_targets[q as usize]
    }

    /// Every head label `(state, arrival)` a cell may legally carry.
    pub fn head_labels(&self) -> Vec<Head> {
        let mut out = Vec::new();
        for q in 0..self.states.len() as StateId {
            for arrival in Arrival::ALL {
                let h = Head { state: q, arrival };
                if self.head_ok(h) {
                    out.push(h);
                }
            }
        }
        out
    }

    pub fn head_ok(&self, h: Head) -> bool {
        if h.state as usize >= self.states.len() {
            return false;
        }
        match h.arrival {
            Arrival::Start => h.state == self.start,
            Arrival::Stay => self.is_halting(h.state),
            Arrival::FromLeft => self.is_right_target(h.state),
            Arrival::FromRight => self.is_left_target(h.state),
        }
    }

    /// Unary validity of a cell's content.
    pub fn content_ok(&self, c: CellContent) -> bool {
        (c.symbol as usize) < self.alphabet.len() && c.head.is_none_or(|h| self.head_ok(h))
    }

    /// Number of distinct cell labels (content and mod-3 coordinates); a
    /// function of the machine description alone.
    pub fn cell_alphabet_size(&self) -> usize {
        self.alphabet.len() * (1 + self.head_labels().len()) * 9
    }

    /// The 2x2 window relation on contents: `tl tr` is a row, `bl br` the row
    /// below it. Cells outside the window are unconstrained, so heads may enter
    /// or leave through the window's sides.
    pub fn window_ok(&self, tl: CellContent, tr: CellContent, bl: CellContent, br: CellContent) -> bool {
        let tops = [tl, tr];
        let bots = [bl, br];
        for b in bots {
            if let Some(h) = b.head {
                if h.arrival == Arrival::Start {
                    return false;
                }
            }
        }
        for col in 0..2usize {
            let top = tops[col];
            let bot = bots[col];
            match top.head {
                None => {
                    if bot.symbol != top.symbol {
                        return false;
                    }
                    if let Some(h) = bot.head {
                        if h.arrival == Arrival::Stay {
                            return false;
                        }
                    }
                }
                Some(h) if self.is_halting(h.state) => {
                    if bot.symbol != top.symbol || bot.head != Some(Head { state: h.state, arrival: Arrival::Stay }) {
                        return false;
                    }
                }
                Some(h) => {
                    let Some(t) = self.transition(h.state, top.symbol) else {
                        return false;
                    };
                    if bot.symbol != t.write {
                        return false;
                    }
                    if let Some(bh) = bot.head {
                        if bh.arrival == Arrival::Stay {
                            return false;
                        }
                    }
                    let target = match t.dir {
                        Move::L => col as isize - 1,
                        Move::R => col as isize + 1,
                    };
                    if (0..2).contains(&target) {
                        let arrival = match t.dir {
                            Move::L => Arrival::FromRight,
                            Move::R => Arrival::FromLeft,
                        };
                        if bots[target as usize].head != Some(Head { state: t.next, arrival }) {
                            return false;
                        }
                    }
                }
            }
        }
        // Heads arriving from inside the window need a source there.
        if let Some(h) = br.head {
            if h.arrival == Arrival::FromLeft && !self.moves(tl, Move::R) {
                return false;
            }
        }
        if let Some(h) = bl.head {
            if h.arrival == Arrival::FromRight && !self.moves(tr, Move::L) {
                return false;
            }
        }
        true
    }

    /// Whether `c` holds a non-halting head that moves in direction `dir`.
    pub fn moves(&self, c: CellContent, dir: Move) -> bool {
        match c.head {
            Some(h) if !self.is_halting(h.state) => {
                self.transition(h.state, c.symbol).is_some_and(|t| t.dir == dir)
            }
            _ => false,
        }
    }

    pub fn blank_content(&self) -> CellContent {
        CellContent { symbol: self.blank, head: None }
    }
}

/// How the head came to sit on a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arrival {
    /// Initial configuration.
    Start,
    /// Moved right from the left neighbour.
    FromLeft,
    /// Moved left from the right neighbour.
    FromRight,
    /// Halted in the row above and stayed.
    Stay,
}

impl Arrival {
    pub const ALL: [Arrival; 4] = [Arrival::Start, Arrival::FromLeft, Arrival::FromRight, Arrival::Stay];

    pub fn code(self) -> u8 {
        match self {
            Arrival::Start => 0,
            Arrival::FromLeft => 1,
            Arrival::FromRight => 2,
            Arrival::Stay => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Head {
    pub state: StateId,
    pub arrival: Arrival,
}

/// Tape symbol plus optional head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellContent {
    pub symbol: SymbolId,
    pub head: Option<Head>,
}

/// A labelled table cell: content plus `(x mod 3, y mod 3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub xm: u8,
    pub ym: u8,
    pub symbol: SymbolId,
    pub head: Option<Head>,
}

impl Cell {
    pub fn new(x: usize, y: usize, content: CellContent) -> Self {
        Cell { xm: (x % 3) as u8, ym: (y % 3) as u8, symbol: content.symbol, head: content.head }
    }

    pub fn content(&self) -> CellContent {
        CellContent { symbol: self.symbol, head: self.head }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub state: StateId,
    pub head: usize,
    pub tape: Vec<SymbolId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { output: u8, steps: u64 },
    Running { steps: u64 },
}

impl RunOutcome {
    pub fn steps(&self) -> u64 {
        match *self {
            RunOutcome::Halted { steps, .. } | RunOutcome::Running { steps } => steps,
        }
    }
}

/// Step-by-step simulator from a blank tape.
#[derive(Clone, Debug)]
pub struct Simulator<'m> {
    m: &'m TuringMachine,
    config: Config,
    steps: u64,
    last_move: Option<Move>,
}

impl<'m> Simulator<'m> {
    pub fn new(m: &'m TuringMachine) -> Self {
        Simulator {
            m,
            config: Config { state: m.start, head: 0, tape: vec![m.blank] },
            steps: 0,
            last_move: None,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn halted(&self) -> bool {
        self.m.is_halting(self.config.state)
    }

    pub fn last_move(&self) -> Option<Move> {
        self.last_move
    }

    /// Performs one step. Moving left of cell 0 is a machine error.
    pub fn step(&mut self) -> Result<()> {
        let c = &mut self.config;
        let a = c.tape[c.head];
        let t = self
            .m
            .transition(c.state, a)
            .ok_or_else(|| Error::Machine("step from a halting state".into()))?;
        c.tape[c.head] = t.write;
        match t.dir {
            Move::L => {
                if c.head == 0 {
                    return Err(Error::Machine(format!(
                        "head moves left of cell 0 at step {}",
                        self.steps + 1
                    )));
                }
                c.head -= 1;
            }
            Move::R => {
                c.head += 1;
                if c.head == c.tape.len() {
                    c.tape.push(self.m.blank);
                }
            }
        }
        c.state = t.next;
        self.steps += 1;
        self.last_move = Some(t.dir);
        Ok(())
    }
}

/// Runs `m` from a blank tape for at most `budget` steps.
pub fn run(m: &TuringMachine, budget: u64) -> Result<RunOutcome> {
    let mut sim = Simulator::new(m);
    while !sim.halted() {
        if sim.steps() >= budget {
            return Ok(RunOutcome::Running { steps: budget });
        }
        sim.step()?;
    }
    Ok(RunOutcome::Halted { output: m.output_of(sim.config.state).unwrap(), steps: sim.steps() })
}

/// Configurations before each step, up to and including the first halting one.
pub fn trace(m: &TuringMachine, budget: u64) -> Result<Vec<Config>> {
    let mut sim = Simulator::new(m);
    let mut out = vec![sim.config().clone()];
    while !sim.halted() {
        if sim.steps() >= budget {
            return Err(Error::Budget(budget));
        }
        sim.step()?;
        out.push(sim.config().clone());
    }
    Ok(out)
}

/// Default ceiling used when a table is requested without an explicit budget.
pub const TABLE_STEP_CEILING: u64 = 1 << 12;

/// Square space-time diagram; row `y` is the configuration before step `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionTable {
    size: usize,
    cells: Vec<Cell>,
    steps: u64,
}

impl ExecutionTable {
    pub fn from_cells(size: usize, cells: Vec<Cell>, steps: u64) -> Self {
        assert_eq!(cells.len(), size * size);
        ExecutionTable { size, cells, steps }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Running time `s` of the machine that produced this table.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn cell(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.size + x]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn row(&self, y: usize) -> &[Cell] {
        &self.cells[y * self.size..(y + 1) * self.size]
    }

    /// Head position and state in row `y`, if exactly one.
    pub fn head_in_row(&self, y: usize) -> Option<(usize, Head)> {
        let mut found = None;
        for (x, c) in self.row(y).iter().enumerate() {
            if let Some(h) = c.head {
                if found.is_some() {
                    return None;
                }
                found = Some((x, h));
            }
        }
        found
    }
}

/// Builds the `(s+1) x (s+1)` execution table of a halting machine.
pub fn execution_table(m: &TuringMachine) -> Result<ExecutionTable> {
    execution_table_with_budget(m, TABLE_STEP_CEILING)
}

pub fn execution_table_with_budget(m: &TuringMachine, budget: u64) -> Result<ExecutionTable> {
    let configs = trace(m, budget)?;
    let steps = (configs.len() - 1) as u64;
    let size = configs.len();
    let mut cells = Vec::with_capacity(size * size);
    let mut prev: Option<&Config> = None;
    for (y, c) in configs.iter().enumerate() {
        let arrival = match prev {
            None => Arrival::Start,
            Some(p) if c.head > p.head => Arrival::FromLeft,
            Some(_) => Arrival::FromRight,
        };
        for x in 0..size {
            let symbol = c.tape.get(x).copied().unwrap_or(m.blank);
            let head = (x == c.head).then_some(Head { state: c.state, arrival });
            cells.push(Cell::new(x, y, CellContent { symbol, head }));
        }
        prev = Some(c);
    }
    Ok(ExecutionTable { size, cells, steps })
}

/// Row-major prefix of the (possibly infinite) run: `rows` configurations of
/// width `width`. Past halting, rows repeat as stationary halting rows.
pub fn table_prefix(m: &TuringMachine, rows: usize, width: usize) -> Result<Vec<Vec<CellContent>>> {
    let mut sim = Simulator::new(m);
    let mut out = Vec::with_capacity(rows);
    let mut arrival = Arrival::Start;
    for _ in 0..rows {
        let c = sim.config();
        let mut row = Vec::with_capacity(width);
        for x in 0..width {
            let symbol = c.tape.get(x).copied().unwrap_or(m.blank);
            let head = (x == c.head).then_some(Head { state: c.state, arrival });
            row.push(CellContent { symbol, head });
        }
        out.push(row);
        if sim.halted() {
            arrival = Arrival::Stay;
        } else {
            sim.step()?;
            arrival = match sim.last_move() {
                Some(Move::R) => Arrival::FromLeft,
                _ => Arrival::FromRight,
            };
        }
    }
    Ok(out)
}

/// Pads to the next power of two: blank columns to the right and stationary
/// copies of the halting row below.
pub fn pad_to_power_of_two(m: &TuringMachine, t: &ExecutionTable) -> ExecutionTable {
    let size = t.size.next_power_of_two();
    if size == t.size {
        return t.clone();
    }
    let mut cells = Vec::with_capacity(size * size);
    let last = t.size - 1;
    for y in 0..size {
        for x in 0..size {
            let content = if y <= last {
                if x < t.size {
                    t.cell(x, y).content()
                } else {
                    m.blank_content()
                }
            } else if x < t.size {
                let c = t.cell(x, last).content();
                CellContent {
                    symbol: c.symbol,
                    head: c.head.map(|h| Head { state: h.state, arrival: Arrival::Stay }),
                }
            } else {
                m.blank_content()
            };
            cells.push(Cell::new(x, y, content));
        }
    }
    ExecutionTable { size, cells, steps: t.steps }
}

/// Checks every table invariant: origin row, one head per row, mod-3
/// coordinates, all 2x2 windows, no head crossing the left or right border,
/// and a halting last row.
pub fn validate_table(m: &TuringMachine, t: &ExecutionTable) -> std::result::Result<(), String> {
    let n = t.size;
    if n == 0 {
        return Err("empty table".into());
    }
    for y in 0..n {
        for x in 0..n {
            let c = t.cell(x, y);
            if c.xm != (x % 3) as u8 || c.ym != (y % 3) as u8 {
                return Err(format!("bad mod-3 coordinates at ({x},{y})"));
            }
            if !m.content_ok(c.content()) {
                return Err(format!("invalid label at ({x},{y})"));
            }
        }
    }
    for x in 0..n {
        let c = t.cell(x, 0);
        let expected_head = (x == 0).then_some(Head { state: m.start, arrival: Arrival::Start });
        if c.symbol != m.blank || c.head != expected_head {
            return Err(format!("row 0 must be blank with the start head on cell 0 (x={x})"));
        }
    }
    for y in 0..n {
        let heads = t.row(y).iter().filter(|c| c.head.is_some()).count();
        if heads != 1 {
            return Err(format!("row {y} has {heads} heads"));
        }
    }
    for y in 0..n.saturating_sub(1) {
        for x in 0..n.saturating_sub(1) {
            let ok = m.window_ok(
                t.cell(x, y).content(),
                t.cell(x + 1, y).content(),
                t.cell(x, y + 1).content(),
                t.cell(x + 1, y + 1).content(),
            );
            if !ok {
                return Err(format!("window at ({x},{y}) violates the transition relation"));
            }
        }
    }
    for y in 0..n {
        let left = t.cell(0, y).content();
        let right = t.cell(n - 1, y).content();
        if matches!(left.head, Some(Head { arrival: Arrival::FromLeft, .. })) || m.moves(left, Move::L) {
            return Err(format!("head crosses the left border at row {y}"));
        }
        if matches!(right.head, Some(Head { arrival: Arrival::FromRight, .. })) || m.moves(right, Move::R) {
            return Err(format!("head crosses the right border at row {y}"));
        }
    }
    match t.head_in_row(n - 1) {
        Some((_, h)) if m.is_halting(h.state) => Ok(()),
        _ => Err("last row is not a halting configuration".into()),
    }
}

/// The horizon-0 decider of the cycle promise problem: reject iff the machine
/// halts within `own_id` steps.
pub fn halting_promise_decider(m: &TuringMachine, own_id: &BigUint) -> bool {
    let budget = own_id.to_u64().unwrap_or(u64::MAX);
    !matches!(run(m, budget), Ok(RunOutcome::Halted { .. }))
}

/// Machines shipped with the crate.
pub mod fixtures {
    use super::*;

    fn build(name: &str, states: &[&str], alphabet: &[&str], rules: &[(&str, &str, &str, &str, Move)]) -> TuringMachine {
        let spec = MachineSpec {
            name: Some(name.into()),
            states: states.iter().map(|s| s.to_string()).collect(),
            start: states[0].into(),
            halt0: "halt0".into(),
            halt1: "halt1".into(),
            blank: alphabet[0].into(),
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            transitions: rules
                .iter()
                .map(|(q, a, p, b, d)| (q.to_string(), a.to_string(), p.to_string(), b.to_string(), *d))
                .collect(),
        };
        TuringMachine::from_spec(&spec).expect("fixture machine is valid")
    }

    /// Halts in one step with output 0.
    pub fn halt0() -> TuringMachine {
        build("HALT0", &["start", "halt0", "halt1"], &["_"], &[("start", "_", "halt0", "_", Move::R)])
    }

    /// Halts in one step with output 1.
    pub fn halt1() -> TuringMachine {
        build("HALT1", &["start", "halt0", "halt1"], &["_"], &[("start", "_", "halt1", "_", Move::R)])
    }

    /// Moves right forever.
    pub fn looping() -> TuringMachine {
        build("LOOP", &["start", "halt0", "halt1"], &["_"], &[("start", "_", "start", "_", Move::R)])
    }

    /// One-symbol machine that walks right, left, right and halts with output 1
    /// after 3 steps.
    pub fn walker() -> TuringMachine {
        build(
            "WALK1",
            &["s", "a", "b", "halt0", "halt1"],
            &["_"],
            &[("s", "_", "a", "_", Move::R), ("a", "_", "b", "_", Move::L), ("b", "_", "halt1", "_", Move::R)],
        )
    }

    /// Two-state, two-symbol machine writing two marks and halting in halt1
    /// after 3 steps.
    pub fn busy_beaver2() -> TuringMachine {
        build(
            "BB2",
            &["A", "B", "halt0", "halt1"],
            &["0", "1"],
            &[
                ("A", "0", "B", "1", Move::R),
                ("B", "0", "A", "1", Move::L),
                ("A", "1", "halt1", "1", Move::R),
                ("B", "1", "halt0", "1", Move::R),
            ],
        )
    }

    /// `k`-state one-symbol machine that moves right `k` times and halts
    /// with the given output; runs for exactly `k` steps.
    pub fn counter(k: usize, output: u8) -> TuringMachine {
        assert!(k >= 1);
        let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        let mut states: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        states.push("halt0");
        states.push("halt1");
        let halt = if output == 0 { "halt0" } else { "halt1" };
        let rules: Vec<(&str, &str, &str, &str, Move)> = (0..k)
            .map(|i| {
                let next = if i + 1 < k { names[i + 1].as_str() } else { halt };
                (names[i].as_str(), "_", next, "_", Move::R)
            })
            .collect();
        build(&format!("COUNT{k}"), &states, &["_"], &rules)
    }

    pub fn by_name(name: &str) -> Option<TuringMachine> {
        match name.to_ascii_uppercase().as_str() {
            "HALT0" => Some(halt0()),
            "HALT1" => Some(halt1()),
            "LOOP" => Some(looping()),
            "WALK1" => Some(walker()),
            "BB2" => Some(busy_beaver2()),
            other => other
                .strip_prefix("COUNT")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| (1..=64).contains(&k))
                .map(|k| counter(k, 1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn halt0_halts_in_one_step_with_output_zero() {
        assert_eq!(run(&halt0(), 10).unwrap(), RunOutcome::Halted { output: 0, steps: 1 });
    }

    #[test]
    fn loop_keeps_running() {
        assert_eq!(run(&looping(), 1000).unwrap(), RunOutcome::Running { steps: 1000 });
    }

    #[test]
    fn bb2_hand_trace() {
        // A@0 reads 0 -> writes 1, R, B; B@1 reads 0 -> writes 1, L, A;
        // A@0 reads 1 -> writes 1, R, halt1.
        let m = busy_beaver2();
        assert_eq!(run(&m, 100).unwrap(), RunOutcome::Halted { output: 1, steps: 3 });
        let tr = trace(&m, 100).unwrap();
        assert_eq!(tr.last().unwrap().tape[..2], [1, 1]);
        assert_eq!(tr.last().unwrap().head, 1);
    }

    #[test]
    fn zero_budget_reports_running() {
        assert_eq!(run(&halt0(), 0).unwrap(), RunOutcome::Running { steps: 0 });
    }

    #[test]
    fn moving_left_of_origin_is_an_error() {
        let spec = MachineSpec {
            name: None,
            states: vec!["s".into(), "h0".into(), "h1".into()],
            start: "s".into(),
            halt0: "h0".into(),
            halt1: "h1".into(),
            blank: "_".into(),
            alphabet: vec!["_".into()],
            transitions: vec![("s".into(), "_".into(), "h0".into(), "_".into(), Move::L)],
        };
        let m = TuringMachine::from_spec(&spec).unwrap();
        assert!(matches!(run(&m, 5), Err(Error::Machine(_))));
    }

    #[test]
    fn non_total_machines_are_rejected() {
        let mut spec = busy_beaver2().to_spec();
        spec.transitions.pop();
        assert!(matches!(TuringMachine::from_spec(&spec), Err(Error::Machine(_))));
    }

    #[test]
    fn json_round_trip_preserves_behaviour() {
        let m = busy_beaver2();
        let text = serde_json::to_string(&m.to_spec()).unwrap();
        let back = TuringMachine::from_json(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn halt0_table_is_two_by_two() {
        let m = halt0();
        let t = execution_table(&m).unwrap();
        assert_eq!(t.size(), 2);
        assert_eq!(t.cell(0, 0).head, Some(Head { state: m.start(), arrival: Arrival::Start }));
        assert_eq!(t.cell(1, 0).head, None);
        assert_eq!(t.cell(0, 1).head, None);
        assert_eq!(t.cell(1, 1).head, Some(Head { state: m.halt0(), arrival: Arrival::FromLeft }));
        assert_eq!((t.cell(0, 0).xm, t.cell(0, 0).ym), (0, 0));
        validate_table(&m, &t).unwrap();
    }

    #[test]
    fn table_rows_reproduce_the_trace() {
        for m in [halt0(), halt1(), walker(), busy_beaver2(), counter(5, 0)] {
            let t = execution_table(&m).unwrap();
            let tr = trace(&m, 100).unwrap();
            assert_eq!(t.size(), tr.len());
            for (y, c) in tr.iter().enumerate() {
                for x in 0..t.size() {
                    let cell = t.cell(x, y);
                    assert_eq!(cell.symbol, c.tape.get(x).copied().unwrap_or(m.blank()));
                    assert_eq!(cell.head.is_some(), x == c.head);
                    if x == c.head {
                        assert_eq!(cell.head.unwrap().state, c.state);
                    }
                }
            }
            validate_table(&m, &t).unwrap();
        }
    }

    #[test]
    fn non_halting_table_is_a_budget_error() {
        assert!(matches!(execution_table_with_budget(&looping(), 50), Err(Error::Budget(50))));
    }

    #[test]
    fn padding() {
        let m = walker();
        let t = execution_table(&m).unwrap();
        assert_eq!(t.size(), 4);
        assert_eq!(pad_to_power_of_two(&m, &t), t);

        let m = counter(2, 1);
        let t = execution_table(&m).unwrap();
        assert_eq!(t.size(), 3);
        let p = pad_to_power_of_two(&m, &t);
        assert_eq!(p.size(), 4);
        // one blank column, one repeated halting row
        assert!(p.row(0)[3].head.is_none() && p.cell(3, 3).symbol == m.blank());
        assert_eq!(p.cell(2, 3).head.unwrap().arrival, Arrival::Stay);
        assert_eq!(p.cell(2, 3).head.unwrap().state, p.cell(2, 2).head.unwrap().state);
        validate_table(&m, &p).unwrap();
        assert_eq!(pad_to_power_of_two(&m, &p), p);
    }

    #[test]
    fn every_single_cell_mutation_breaks_a_rule() {
        for m in [halt0(), walker(), busy_beaver2(), counter(3, 0)] {
            let t = pad_to_power_of_two(&m, &execution_table(&m).unwrap());
            let heads = m.head_labels();
            for i in 0..t.cells().len() {
                let orig = t.cells()[i];
                let mut alternatives = Vec::new();
                for symbol in 0..m.num_symbols() as SymbolId {
                    alternatives.push(Cell { symbol, head: None, ..orig });
                    for &h in &heads {
                        alternatives.push(Cell { symbol, head: Some(h), ..orig });
                    }
                }
                for xm in 0..3 {
                    for ym in 0..3 {
                        alternatives.push(Cell { xm, ym, ..orig });
                    }
                }
                for alt in alternatives {
                    if alt == orig {
                        continue;
                    }
                    let mut cells = t.cells().to_vec();
                    cells[i] = alt;
                    let mutated = ExecutionTable::from_cells(t.size(), cells, t.steps());
                    assert!(
                        validate_table(&m, &mutated).is_err(),
                        "{}: mutation {alt:?} at cell {i} went undetected",
                        m.name()
                    );
                }
            }
        }
    }

    #[test]
    fn label_alphabet_is_bounded_by_the_machine() {
        let m = busy_beaver2();
        // heads: (A,Start), (A,FromRight), (B,FromLeft), halt0/halt1 FromLeft and Stay
        assert_eq!(m.head_labels().len(), 7);
        assert_eq!(m.cell_alphabet_size(), 2 * 8 * 9);
        assert_eq!(halt0().cell_alphabet_size(), 5 * 9);
    }

    #[test]
    fn promise_decider() {
        let n = |v: u64| BigUint::from(v);
        assert!(halting_promise_decider(&looping(), &n(12345)));
        assert!(halting_promise_decider(&halt0(), &n(0)));
        assert!(!halting_promise_decider(&halt0(), &n(5)));
        let m = counter(17, 1);
        assert_eq!(run(&m, 100).unwrap().steps(), 17);
        assert!(!halting_promise_decider(&m, &n(17)));
        assert!(halting_promise_decider(&m, &n(16)));
    }
}
