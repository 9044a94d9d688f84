//! Level assignments, loop witnesses and tile validity predicates.
//!
//! A stratification gives every vertex an integer level such that each edge
//! drops exactly one level. A digraph admits one iff every loop of its
//! underlying multigraph traverses as many edges forward as backward; the
//! functions here either produce the normalized levels or a concrete
//! offending loop. Tiles are stratifiable subgraphs of `B_K^M`, and their
//! certificate for scalable tilings is that no loop spans more than `M`
//! levels.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::graphs::Word;

#[derive(Debug, Error)]
pub enum StratError {
    #[error("edge ({u}, {v}) is not an edge of B_{k}^{m}")]
    EdgeOutsideHost { k: u32, m: u32, u: usize, v: usize },
    #[error("expected {n} levels, got {v}")]
    BadLevelCount { v: usize, n: usize },
    #[error("edge ({u}, {v}) violates the level assignment ({lu} vs {lv})")]
    LevelConflict { u: usize, v: usize, lu: u32, lv: u32 },
    #[error("graph is not stratifiable (witness: {0})")]
    Unstratifiable(LoopTrace),
    #[error("loop trace is invalid: {0}")]
    InvalidTrace(String),
    #[error("tile files require K <= 10, got K={0}")]
    BaseTooLarge(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Traversal direction of one loop step relative to the digraph edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// A closed walk over distinct vertices; step `i` joins vertex `i` to vertex
/// `i+1` (cyclically) in the stated direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopTrace {
    steps: Vec<(usize, Direction)>,
}

impl LoopTrace {
    pub fn new(steps: Vec<(usize, Direction)>) -> Result<LoopTrace, StratError> {
        if steps.is_empty() {
            return Err(StratError::InvalidTrace("empty trace".into()));
        }
        let mut seen: Vec<usize> = steps.iter().map(|&(v, _)| v).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(StratError::InvalidTrace("repeated vertex".into()));
        }
        Ok(LoopTrace { steps })
    }

    pub fn steps(&self) -> &[(usize, Direction)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `(forward, backward)` edge counts; the loop is stratifiable iff equal.
    pub fn balance(&self) -> (usize, usize) {
        let fwd = self.steps.iter().filter(|&&(_, d)| d == Direction::Forward).count();
        (fwd, self.steps.len() - fwd)
    }

    /// Check every step against an explicit edge list (multigraph-aware).
    pub fn is_valid_in(&self, n: usize, edges: &[(usize, usize)]) -> bool {
        let mut remaining: Vec<(usize, usize)> = edges.to_vec();
        for i in 0..self.steps.len() {
            let (v, dir) = self.steps[i];
            let (w, _) = self.steps[(i + 1) % self.steps.len()];
            if v >= n || w >= n {
                return false;
            }
            let need = match dir {
                Direction::Forward => (v, w),
                Direction::Backward => (w, v),
            };
            match remaining.iter().position(|&e| e == need) {
                Some(pos) => {
                    remaining.swap_remove(pos);
                }
                None => return false,
            }
        }
        true
    }
}

impl fmt::Display for LoopTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(v, d) in &self.steps {
            match d {
                Direction::Forward => write!(f, "{v} -> ")?,
                Direction::Backward => write!(f, "{v} <- ")?,
            }
        }
        write!(f, "{}", self.steps[0].0)
    }
}

/// `(forward, backward)` counts of a loop trace.
pub fn loop_balance(trace: &LoopTrace) -> (usize, usize) {
    trace.balance()
}

/// A level assignment with the smallest level of every connected component
/// normalized to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    levels: Vec<u32>,
}

impl Stratification {
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn level(&self, v: usize) -> u32 {
        self.levels[v]
    }

    pub fn into_levels(self) -> Vec<u32> {
        self.levels
    }
}

/// Assign levels by breadth-first propagation of `σ(u) = σ(v) + 1` from a
/// reference vertex per component; on a conflict the two discovery paths are
/// spliced into an unbalanced loop witness.
pub fn stratify(n: usize, edges: &[(usize, usize)]) -> Result<Stratification, LoopTrace> {
    // A self-loop is a one-edge unbalanced loop.
    for &(u, v) in edges {
        if u == v {
            return Err(LoopTrace::new(vec![(u, Direction::Forward)]).expect("one step"));
        }
    }

    let mut adj: Vec<Vec<(usize, Direction)>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push((v, Direction::Forward));
        adj[v].push((u, Direction::Backward));
    }

    let mut level = vec![i64::MIN; n];
    let mut parent: Vec<Option<(usize, Direction)>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut component = vec![usize::MAX; n];
    let mut queue = VecDeque::new();

    for root in 0..n {
        if level[root] != i64::MIN {
            continue;
        }
        level[root] = 0;
        component[root] = root;
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            for &(y, dir) in &adj[x] {
                // Traversing x -> y along the digraph edge (x, y) means
                // σ(y) = σ(x) - 1; going against an edge raises the level.
                let expected = match dir {
                    Direction::Forward => level[x] - 1,
                    Direction::Backward => level[x] + 1,
                };
                if level[y] == i64::MIN {
                    level[y] = expected;
                    parent[y] = Some((x, dir));
                    depth[y] = depth[x] + 1;
                    component[y] = root;
                    queue.push_back(y);
                } else if level[y] != expected {
                    return Err(splice_witness(x, y, dir, &parent, &depth));
                }
            }
        }
    }

    let mut min_level = vec![i64::MAX; n];
    for v in 0..n {
        let c = component[v];
        min_level[c] = min_level[c].min(level[v]);
    }
    let levels = (0..n).map(|v| (level[v] - min_level[component[v]]) as u32).collect();
    Ok(Stratification { levels })
}

/// Splice the discovery paths of `x` and `y` with the conflicting edge
/// between them into a simple loop.
fn splice_witness(
    x: usize,
    y: usize,
    conflict_dir: Direction,
    parent: &[Option<(usize, Direction)>],
    depth: &[usize],
) -> LoopTrace {
    let (mut a, mut b) = (x, y);
    let mut up_a: Vec<usize> = vec![a];
    let mut up_b: Vec<usize> = vec![b];
    while depth[a] > depth[b] {
        a = parent[a].expect("deeper vertex has a parent").0;
        up_a.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b].expect("deeper vertex has a parent").0;
        up_b.push(b);
    }
    while a != b {
        a = parent[a].expect("walk meets at a common ancestor").0;
        b = parent[b].expect("walk meets at a common ancestor").0;
        up_a.push(a);
        up_b.push(b);
    }

    // up_a = [x, ..., lca], up_b = [y, ..., lca]
    let mut steps = Vec::new();
    for i in (1..up_a.len()).rev() {
        let (_, dir) = parent[up_a[i - 1]].expect("tree edge");
        steps.push((up_a[i], dir));
    }
    steps.push((x, conflict_dir));
    for i in 0..up_b.len() - 1 {
        // stepping from a vertex to its parent runs against the tree edge
        let (_, dir) = parent[up_b[i]].expect("tree edge");
        steps.push((up_b[i], dir.flip()));
    }
    LoopTrace::new(steps).expect("spliced paths form a simple loop")
}

/// Exhaustively enumerate the simple loops of the underlying undirected
/// multigraph. Exponential; intended as a reference oracle for small graphs.
pub fn enumerate_loops(n: usize, edges: &[(usize, usize)]) -> Vec<LoopTrace> {
    let mut adj: Vec<Vec<(usize, usize, Direction)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            continue;
        }
        adj[u].push((v, id, Direction::Forward));
        adj[v].push((u, id, Direction::Backward));
    }

    let mut out: Vec<LoopTrace> = edges
        .iter()
        .filter(|&&(u, v)| u == v)
        .map(|&(u, _)| LoopTrace::new(vec![(u, Direction::Forward)]).expect("self loop"))
        .collect();

    // Canonical form: a loop is rooted at its smallest vertex and the id of
    // its first edge is below the id of its closing edge, so each loop is
    // reported exactly once.
    struct Dfs<'a> {
        adj: &'a [Vec<(usize, usize, Direction)>],
        path: Vec<(usize, Direction, usize)>,
        on_path: Vec<bool>,
        used_edge: Vec<bool>,
        out: Vec<LoopTrace>,
    }

    impl Dfs<'_> {
        fn run(&mut self, start: usize, current: usize) {
            for idx in 0..self.adj[current].len() {
                let (next, id, dir) = self.adj[current][idx];
                if self.used_edge[id] || next < start {
                    continue;
                }
                if next == start {
                    if !self.path.is_empty() && self.path[0].2 < id {
                        let mut steps: Vec<(usize, Direction)> =
                            self.path.iter().map(|&(v, d, _)| (v, d)).collect();
                        steps.push((current, dir));
                        self.out.push(LoopTrace::new(steps).expect("simple loop"));
                    }
                    continue;
                }
                if self.on_path[next] {
                    continue;
                }
                self.path.push((current, dir, id));
                self.on_path[next] = true;
                self.used_edge[id] = true;
                self.run(start, next);
                self.used_edge[id] = false;
                self.on_path[next] = false;
                self.path.pop();
            }
        }
    }

    let mut dfs = Dfs {
        adj: &adj,
        path: Vec::new(),
        on_path: vec![false; n],
        used_edge: vec![false; edges.len()],
        out: Vec::new(),
    };
    for start in 0..n {
        dfs.on_path[start] = true;
        dfs.run(start, start);
        dfs.on_path[start] = false;
    }
    out.extend(dfs.out);
    out
}

/// Level span of a loop: largest minus smallest level on it.
pub fn loop_span(trace: &LoopTrace, levels: &[u32]) -> u32 {
    let mut lo = u32::MAX;
    let mut hi = 0;
    for &(v, _) in trace.steps() {
        lo = lo.min(levels[v]);
        hi = hi.max(levels[v]);
    }
    hi - lo
}

/// Maximum loop height of a stratified graph, computed per biconnected
/// block: within a block any two vertices lie on a common simple loop, so
/// the block's level span equals its largest loop height. `None` means the
/// graph has no loops at all.
pub fn max_loop_height(n: usize, edges: &[(usize, usize)], levels: &[u32]) -> Option<u32> {
    assert_eq!(levels.len(), n);
    let mut best: Option<u32> = None;
    for &(u, v) in edges {
        if u == v {
            best = Some(best.unwrap_or(0));
        }
    }

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            continue;
        }
        adj[u].push((v, id));
        adj[v].push((u, id));
    }

    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0usize;
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    // DFS frame: (vertex, incoming edge id, next adjacency slot).
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (u, pe, ref mut idx)) = stack.last_mut() {
            if *idx < adj[u].len() {
                let (w, id) = adj[u][*idx];
                *idx += 1;
                if id == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push((u, w));
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, id, 0));
                } else if disc[w] < disc[u] {
                    edge_stack.push((u, w));
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&mut (p, _, _)) = stack.last_mut() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        // everything above and including (p, u) is one block
                        let mut block_edges = 0usize;
                        let mut lo = u32::MAX;
                        let mut hi = 0u32;
                        while let Some((a, b)) = edge_stack.pop() {
                            block_edges += 1;
                            lo = lo.min(levels[a]).min(levels[b]);
                            hi = hi.max(levels[a]).max(levels[b]);
                            if (a, b) == (p, u) {
                                break;
                            }
                        }
                        if block_edges >= 2 {
                            let span = hi - lo;
                            best = Some(best.map_or(span, |b| b.max(span)));
                        }
                    }
                }
            }
        }
    }
    best
}

/// Reference implementation of [`max_loop_height`] by exhaustive loop
/// enumeration. Exponential; use on small graphs only.
pub fn max_loop_height_exhaustive(
    n: usize,
    edges: &[(usize, usize)],
    levels: &[u32],
) -> Option<u32> {
    enumerate_loops(n, edges).iter().map(|t| loop_span(t, levels)).max()
}

pub(crate) fn pow_usize(k: u32, m: u32) -> usize {
    (k as usize).checked_pow(m).expect("K^M fits in usize")
}

/// True when `(u, v)` is an edge of `B_K^M` (a left shift of the word).
pub fn is_debruijn_edge(k: u32, m: u32, u: usize, v: usize) -> bool {
    let cells = pow_usize(k, m);
    u < cells && v < cells && v / k as usize == u % pow_usize(k, m - 1)
}

/// A subgraph of `B_K^M` on all `K^M` words, with an optional stratification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileGraph {
    k: u32,
    m: u32,
    edges: Vec<(usize, usize)>,
    levels: Option<Vec<u32>>,
}

impl TileGraph {
    pub fn new(k: u32, m: u32, mut edges: Vec<(usize, usize)>) -> Result<TileGraph, StratError> {
        assert!(k >= 2 && m >= 1, "tiles require K >= 2 and M >= 1");
        for &(u, v) in &edges {
            if !is_debruijn_edge(k, m, u, v) {
                return Err(StratError::EdgeOutsideHost { k, m, u, v });
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(TileGraph { k, m, edges, levels: None })
    }

    /// Attach an explicit level assignment, checking every edge drops one
    /// level.
    pub fn with_levels(self, levels: Vec<u32>) -> Result<TileGraph, StratError> {
        if levels.len() != self.vertex_count() {
            return Err(StratError::BadLevelCount { v: levels.len(), n: self.vertex_count() });
        }
        for &(u, v) in &self.edges {
            if levels[u] != levels[v] + 1 {
                return Err(StratError::LevelConflict { u, v, lu: levels[u], lv: levels[v] });
            }
        }
        Ok(TileGraph { levels: Some(levels), ..self })
    }

    /// The saturated tile of a level map: every `B_K^M` edge consistent with
    /// the levels is retained.
    pub fn saturated(k: u32, m: u32, levels: Vec<u32>) -> TileGraph {
        let cells = pow_usize(k, m);
        assert_eq!(levels.len(), cells);
        let tail = pow_usize(k, m - 1);
        let mut edges = Vec::new();
        for u in 0..cells {
            for t in 0..k as usize {
                let v = (u % tail) * k as usize + t;
                if levels[v] < u32::MAX && levels[u] == levels[v] + 1 {
                    edges.push((u, v));
                }
            }
        }
        TileGraph { k, m, edges, levels: Some(levels) }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        pow_usize(self.k, self.m)
    }

    /// Total `B_K^M` edge budget `K^(M+1)`.
    pub fn edge_capacity(&self) -> u64 {
        (self.k as u64).pow(self.m + 1)
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn broken_count(&self) -> u64 {
        self.edge_capacity() - self.edge_count()
    }

    pub fn levels(&self) -> Option<&[u32]> {
        self.levels.as_deref()
    }

    pub fn stratify(&self) -> Result<Stratification, LoopTrace> {
        stratify(self.vertex_count(), &self.edges)
    }

    /// Stored levels if present, otherwise freshly computed ones.
    pub fn levels_or_compute(&self) -> Result<Vec<u32>, LoopTrace> {
        match &self.levels {
            Some(l) => Ok(l.clone()),
            None => Ok(self.stratify()?.into_levels()),
        }
    }

    /// Local word of a tile vertex.
    pub fn word(&self, x: usize) -> Word {
        Word::from_index(x as u64, self.k, self.m)
    }

    /// Full validity report: stratifiability, maximum loop height, the
    /// height certificate `h <= M`, and edge accounting.
    pub fn validate(&self) -> TileReport {
        let (stratifiable, height) = match self.levels_or_compute() {
            Ok(levels) => (true, max_loop_height(self.vertex_count(), &self.edges, &levels)),
            Err(_) => (false, None),
        };
        let certified = stratifiable && height.map_or(true, |h| h <= self.m);
        TileReport {
            k: self.k,
            m: self.m,
            stratifiable,
            height,
            certified,
            internal: self.edge_count(),
            broken: self.broken_count(),
        }
    }
}

/// Validation summary for a tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileReport {
    pub k: u32,
    pub m: u32,
    pub stratifiable: bool,
    /// Largest loop height, `None` when the tile has no loops.
    pub height: Option<u32>,
    /// Scalability certificate: stratifiable and `h <= M`.
    pub certified: bool,
    pub internal: u64,
    pub broken: u64,
}

impl fmt::Display for TileReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "K={} M={} internal={} broken={} stratifiable={} ",
            self.k, self.m, self.internal, self.broken, self.stratifiable
        )?;
        match self.height {
            Some(h) => write!(f, "max_height={h} ")?,
            None => write!(f, "loops=none ")?,
        }
        write!(f, "certified={}", self.certified)
    }
}

/// Read a tile file: `K M`, then `K^M` lines `word level`, then an optional
/// `EDGES` section with one `word word` pair per line. Without the section
/// the edge set is the saturated one implied by the levels.
pub fn read_tile<R: BufRead>(reader: R) -> Result<TileGraph, StratError> {
    let mut lines = reader.lines().enumerate();
    let (header_no, header) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                let t = line.trim().to_string();
                if !t.is_empty() && !t.starts_with('#') {
                    break (no + 1, t);
                }
            }
            None => return Err(StratError::Parse { line: 0, msg: "empty tile file".into() }),
        }
    };

    let mut it = header.split_whitespace();
    let mut parse_u32 = |what: &str| -> Result<u32, StratError> {
        it.next()
            .and_then(|x| x.parse().ok())
            .ok_or(StratError::Parse { line: header_no, msg: format!("expected {what} in header") })
    };
    let k = parse_u32("K")?;
    let m = parse_u32("M")?;
    if it.next().is_some() {
        return Err(StratError::Parse { line: header_no, msg: "trailing tokens in header".into() });
    }
    if k > 10 {
        return Err(StratError::BaseTooLarge(k));
    }
    if k < 2 || m < 1 {
        return Err(StratError::Parse {
            line: header_no,
            msg: format!("bad parameters K={k} M={m}"),
        });
    }

    let cells = pow_usize(k, m);
    let mut levels: Vec<Option<u32>> = vec![None; cells];
    let mut filled = 0usize;
    let mut edges: Option<Vec<(usize, usize)>> = None;

    let parse_word = |no: usize, tok: &str| -> Result<usize, StratError> {
        let w =
            Word::parse(tok, k).map_err(|e| StratError::Parse { line: no, msg: e.to_string() })?;
        if w.len() != m as usize {
            return Err(StratError::Parse {
                line: no,
                msg: format!("word {tok} is not {m} digits"),
            });
        }
        Ok(w.index() as usize)
    };

    for (no, line) in lines {
        let no = no + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t == "EDGES" {
            if edges.is_some() {
                return Err(StratError::Parse { line: no, msg: "duplicate EDGES section".into() });
            }
            edges = Some(Vec::new());
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(StratError::Parse { line: no, msg: "expected two tokens".into() });
        };
        match edges.as_mut() {
            None => {
                let x = parse_word(no, a)?;
                let level: u32 = b
                    .parse()
                    .map_err(|_| StratError::Parse { line: no, msg: format!("bad level {b}") })?;
                if levels[x].replace(level).is_some() {
                    return Err(StratError::Parse { line: no, msg: format!("duplicate word {a}") });
                }
                filled += 1;
            }
            Some(list) => list.push((parse_word(no, a)?, parse_word(no, b)?)),
        }
    }

    if filled != cells {
        return Err(StratError::Parse {
            line: 0,
            msg: format!("expected {cells} level lines, found {filled}"),
        });
    }
    let levels: Vec<u32> = levels.into_iter().map(|l| l.expect("all filled")).collect();
    match edges {
        None => Ok(TileGraph::saturated(k, m, levels)),
        Some(list) => TileGraph::new(k, m, list)?.with_levels(levels),
    }
}

/// Write a tile as levels plus an explicit edge list.
pub fn write_tile<W: Write>(w: &mut W, tile: &TileGraph) -> Result<(), StratError> {
    if tile.k() > 10 {
        return Err(StratError::BaseTooLarge(tile.k()));
    }
    let levels = tile.levels_or_compute().map_err(StratError::Unstratifiable)?;
    writeln!(w, "{} {}", tile.k(), tile.m())?;
    for x in 0..tile.vertex_count() {
        writeln!(w, "{} {}", tile.word(x), levels[x])?;
    }
    writeln!(w, "EDGES")?;
    for &(u, v) in tile.edges() {
        writeln!(w, "{} {}", tile.word(u), tile.word(v))?;
    }
    Ok(())
}
