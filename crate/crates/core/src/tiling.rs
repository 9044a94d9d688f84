//! Assembling a full tiling of a host graph from a certified tile, plus the
//! independent verifier and the board/cable exports.
//!
//! Construction follows the constructive recipe: pick the lowest word of
//! each tile component as a seed, identify its projection fiber with the
//! tile-index set, then walk the tile edges breadth-first, lifting each edge
//! through the unique child (or parent) with the right projection. A tile
//! whose loops stay within height `M` can never produce a lift conflict.

use std::collections::{BTreeSet, VecDeque};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::graphs::{GraphError, GraphKind, HostGraph, LatinSquare, Projection, SizeSpec, Word};
use crate::stratification::{StratError, TileGraph, TileReport};

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("tile degree {tile_k} does not match host degree {host_k}")]
    DegreeMismatch { tile_k: u32, host_k: u32 },
    #[error("host has K-adic exponent {n}, tile needs at least {m}")]
    HostTooSmall { n: u32, m: u32 },
    #[error("tile is not certified for scalable tilings ({report}); pass force to try anyway")]
    NotCertified { report: TileReport },
    #[error("lift conflict at tile index {tile_index}, edge ({u}, {v}): hosts {existing} vs {lifted}")]
    Obstruction { tile_index: u32, u: usize, v: usize, existing: u64, lifted: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Strat(#[from] StratError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A complete tiling: a bijection between host vertices and
/// `(tile index, tile vertex)` pairs under which every tile copy embeds.
#[derive(Debug, Clone)]
pub struct Tiling {
    host: HostGraph,
    tile: TileGraph,
    latin_label: String,
    /// host vertex -> (tile index, local word index)
    assignment: Vec<(u32, u32)>,
    /// tile index * K^M + local word index -> host vertex
    table: Vec<u64>,
}

/// Independent verification results plus edge accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingReport {
    pub bijective: bool,
    pub embedding: bool,
    pub parallel_routing: bool,
    pub internal_edges: u64,
    pub inter_tile_edges: u64,
}

impl TilingReport {
    pub fn all_ok(&self) -> bool {
        self.bijective && self.embedding && self.parallel_routing
    }
}

impl std::fmt::Display for TilingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "bijective={} embedding={} parallel_routing={} internal={} inter={}",
            self.bijective,
            self.embedding,
            self.parallel_routing,
            self.internal_edges,
            self.inter_tile_edges
        )
    }
}

/// Build a tiling of `host` by `tile` using the Latin-square projection.
///
/// `force` skips the height certificate and attempts the construction
/// regardless; an uncertified tile may then fail with an obstruction.
pub fn build_tiling(
    host: &HostGraph,
    tile: &TileGraph,
    latin: &LatinSquare,
    force: bool,
) -> Result<Tiling, TilingError> {
    if tile.k() != host.degree() {
        return Err(TilingError::DegreeMismatch { tile_k: tile.k(), host_k: host.degree() });
    }
    if host.exponent() < tile.m() {
        return Err(TilingError::HostTooSmall { n: host.exponent(), m: tile.m() });
    }
    let report = tile.validate();
    if !report.certified && !force {
        return Err(TilingError::NotCertified { report });
    }

    let projection = Projection::new(*host, tile.m(), latin.clone())?;
    let cells = tile.vertex_count();
    let tiles = (host.vertices() / cells as u64) as u32;

    // Fibers, ascending by host index.
    let mut fibers: Vec<Vec<u64>> = vec![Vec::new(); cells];
    for v in 0..host.vertices() {
        fibers[projection.project_index(v)].push(v);
    }
    debug_assert!(fibers.iter().all(|f| f.len() as u32 == tiles), "fibers must be uniform");

    // Tile adjacency in both directions.
    let mut out_adj: Vec<Vec<usize>> = vec![Vec::new(); cells];
    let mut in_adj: Vec<Vec<usize>> = vec![Vec::new(); cells];
    for &(x, y) in tile.edges() {
        out_adj[x].push(y);
        in_adj[y].push(x);
    }

    let unassigned = u64::MAX;
    let mut table = vec![unassigned; tiles as usize * cells];
    let mut seen = vec![false; cells];
    let mut queue = VecDeque::new();

    for seed in 0..cells {
        if seen[seed] {
            continue;
        }
        // Seed this component: its fiber, in host order, is the index set.
        seen[seed] = true;
        for (i, &v) in fibers[seed].iter().enumerate() {
            table[i * cells + seed] = v;
        }
        queue.push_back(seed);
        while let Some(x) = queue.pop_front() {
            for dir in 0..2 {
                let nbrs = if dir == 0 { &out_adj[x] } else { &in_adj[x] };
                for &y in nbrs {
                    let first_visit = !seen[y];
                    for i in 0..tiles as usize {
                        let v = table[i * cells + x];
                        let lifted = unique_neighbor(host, &projection, v, y, dir == 0);
                        let slot = &mut table[i * cells + y];
                        if *slot == unassigned {
                            *slot = lifted;
                        } else if *slot != lifted {
                            let (eu, ev) = if dir == 0 { (x, y) } else { (y, x) };
                            return Err(TilingError::Obstruction {
                                tile_index: i as u32,
                                u: eu,
                                v: ev,
                                existing: *slot,
                                lifted,
                            });
                        }
                    }
                    if first_visit {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
    }

    let mut assignment = vec![(u32::MAX, u32::MAX); host.vertices() as usize];
    for i in 0..tiles as usize {
        for x in 0..cells {
            let v = table[i * cells + x];
            debug_assert_ne!(v, unassigned);
            assignment[v as usize] = (i as u32, x as u32);
        }
    }

    Ok(Tiling {
        host: *host,
        tile: tile.clone(),
        latin_label: latin.name().to_string(),
        assignment,
        table,
    })
}

/// The unique child (or parent) of `v` projecting to `target`; existence and
/// uniqueness are exactly the distribution properties of the projection.
fn unique_neighbor(
    host: &HostGraph,
    projection: &Projection,
    v: u64,
    target: usize,
    forward: bool,
) -> u64 {
    let nbrs = if forward { host.children(v) } else { host.parents(v) };
    let mut hit = None;
    for w in nbrs {
        if projection.project_index(w) == target {
            assert!(hit.is_none(), "distribution property violated at host vertex {v}");
            hit = Some(w);
        }
    }
    hit.expect("distribution property guarantees a matching neighbor")
}

impl Tiling {
    pub fn host(&self) -> &HostGraph {
        &self.host
    }

    pub fn tile(&self) -> &TileGraph {
        &self.tile
    }

    pub fn latin_label(&self) -> &str {
        &self.latin_label
    }

    pub fn tile_count(&self) -> u32 {
        (self.host.vertices() / self.tile.vertex_count() as u64) as u32
    }

    /// `(tile index, local word index)` of a host vertex.
    pub fn locate(&self, v: u64) -> (u32, u32) {
        self.assignment[v as usize]
    }

    /// Host vertex of `(tile index, local word index)`.
    pub fn host_vertex(&self, tile_index: u32, local: u32) -> u64 {
        self.table[tile_index as usize * self.tile.vertex_count() + local as usize]
    }

    /// Swap the assignments of two host vertices. Keeps the map bijective
    /// while (generally) breaking the embedding; useful for negative tests.
    pub fn corrupt_swap(&mut self, a: u64, b: u64) {
        let (ia, ib) = (self.assignment[a as usize], self.assignment[b as usize]);
        self.assignment[a as usize] = ib;
        self.assignment[b as usize] = ia;
        let cells = self.tile.vertex_count();
        self.table[ib.0 as usize * cells + ib.1 as usize] = a;
        self.table[ia.0 as usize * cells + ia.1 as usize] = b;
    }

    /// Re-check every defining property from scratch, using only the
    /// assignment itself (not the projection that built it).
    pub fn verify(&self) -> TilingReport {
        let cells = self.tile.vertex_count();
        let tiles = self.tile_count() as usize;
        let v_total = self.host.vertices();

        // Bijectivity: every pair hit exactly once, every host vertex placed.
        let mut pair_seen = vec![false; tiles * cells];
        let mut bijective = true;
        for v in 0..v_total {
            let (i, x) = self.assignment[v as usize];
            if (i as usize) >= tiles
                || (x as usize) >= cells
                || std::mem::replace(&mut pair_seen[i as usize * cells + x as usize], true)
            {
                bijective = false;
                break;
            }
        }
        bijective = bijective && pair_seen.iter().all(|&s| s);

        // Embedding: every tile edge maps to a host edge in every copy.
        let mut embedding = bijective;
        if embedding {
            'outer: for i in 0..tiles {
                for &(x, y) in self.tile.edges() {
                    let u = self.table[i * cells + x];
                    let w = self.table[i * cells + y];
                    if !self.host.children(u).contains(&w) {
                        embedding = false;
                        break 'outer;
                    }
                }
            }
        }

        // Parallel routing: per local vertex, the projected child set is the
        // same in every copy (projection read off the assignment).
        let mut parallel_routing = bijective;
        if parallel_routing {
            'outer2: for x in 0..cells {
                let mut reference: Option<BTreeSet<u32>> = None;
                for i in 0..tiles {
                    let v = self.table[i * cells + x];
                    let set: BTreeSet<u32> = self
                        .host
                        .children(v)
                        .iter()
                        .map(|&c| self.assignment[c as usize].1)
                        .collect();
                    match &reference {
                        None => reference = Some(set),
                        Some(r) => {
                            if *r != set {
                                parallel_routing = false;
                                break 'outer2;
                            }
                        }
                    }
                }
            }
        }

        // Internal edges are images of tile edges; a same-copy host edge
        // that the board does not wire still needs a cable.
        let mut internal = 0u64;
        for v in 0..v_total {
            let (i, x) = self.assignment[v as usize];
            for c in self.host.children(v) {
                let (j, y) = self.assignment[c as usize];
                if i == j && self.tile.edges().binary_search(&(x as usize, y as usize)).is_ok() {
                    internal += 1;
                }
            }
        }
        TilingReport {
            bijective,
            embedding,
            parallel_routing,
            internal_edges: internal,
            inter_tile_edges: self.host.edge_count() - internal,
        }
    }

    /// Board/cable netlist: the tile's internal edges once, then every
    /// inter-tile host edge as `tile local -> tile local`.
    pub fn write_netlist<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "# netlist {} K={} V={} M={} tiles={} latin={}",
            self.host.kind().name(),
            self.host.degree(),
            self.host.vertices(),
            self.tile.m(),
            self.tile_count(),
            self.latin_label
        )?;
        writeln!(w, "BOARD")?;
        for &(x, y) in self.tile.edges() {
            writeln!(w, "{} -> {}", self.tile.word(x), self.tile.word(y))?;
        }
        writeln!(w, "CABLES")?;
        let mut cables = Vec::new();
        for v in 0..self.host.vertices() {
            let (i, x) = self.assignment[v as usize];
            for c in self.host.children(v) {
                let (j, y) = self.assignment[c as usize];
                if i != j || self.tile.edges().binary_search(&(x as usize, y as usize)).is_err() {
                    cables.push((i, x, j, y));
                }
            }
        }
        cables.sort_unstable();
        for (i, x, j, y) in cables {
            writeln!(
                w,
                "{} {} -> {} {}",
                i,
                self.tile.word(x as usize),
                j,
                self.tile.word(y as usize)
            )?;
        }
        Ok(())
    }

    /// Structured dump: a header line, one `host tile local` line per
    /// vertex, and the tile edge set (so the dump is self-contained).
    pub fn write_dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "{} {} {} {} {}",
            self.host.kind().name(),
            self.host.degree(),
            self.host.vertices(),
            self.tile.m(),
            self.latin_label
        )?;
        for v in 0..self.host.vertices() {
            let (i, x) = self.assignment[v as usize];
            writeln!(w, "{v} {i} {}", self.tile.word(x as usize))?;
        }
        writeln!(w, "EDGES")?;
        for &(x, y) in self.tile.edges() {
            writeln!(w, "{} {}", self.tile.word(x), self.tile.word(y))?;
        }
        Ok(())
    }

    /// DOT rendering with one fill color per tile and bold intra-tile edges.
    pub fn write_dot<W: Write>(&self, w: &mut W) -> io::Result<()> {
        const PALETTE: [&str; 12] = [
            "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f",
            "#ff7f00", "#cab2d6", "#6a3d9a", "#ffff99", "#b15928",
        ];
        writeln!(
            w,
            "digraph tiling_{}_{}_{} {{",
            self.host.kind().name(),
            self.host.degree(),
            self.host.vertices()
        )?;
        writeln!(w, "  node [shape=box style=filled];")?;
        for v in 0..self.host.vertices() {
            let (i, x) = self.assignment[v as usize];
            writeln!(
                w,
                "  v{v} [label=\"{v} | t{i}:{}\" fillcolor=\"{}\"];",
                self.tile.word(x as usize),
                PALETTE[i as usize % PALETTE.len()]
            )?;
        }
        for v in 0..self.host.vertices() {
            let (i, x) = self.assignment[v as usize];
            for c in self.host.children(v) {
                let (j, y) = self.assignment[c as usize];
                let intra = i == j && self.tile.edges().binary_search(&(x as usize, y as usize)).is_ok();
                if intra {
                    writeln!(w, "  v{v} -> v{c} [style=bold];")?;
                } else {
                    writeln!(w, "  v{v} -> v{c} [color=gray];")?;
                }
            }
        }
        writeln!(w, "}}")
    }
}

/// Verify a tiling; see [`Tiling::verify`].
pub fn verify_tiling(t: &Tiling) -> TilingReport {
    t.verify()
}

/// Parse a dump produced by [`Tiling::write_dump`].
pub fn read_dump<R: BufRead>(reader: R) -> Result<Tiling, TilingError> {
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
            None => return Err(TilingError::Parse { line: 0, msg: "empty dump".into() }),
        }
    };

    let tokens: Vec<&str> = header.split_whitespace().collect();
    let [kind, k, v, m, latin] = tokens.as_slice() else {
        return Err(TilingError::Parse {
            line: header_no,
            msg: "expected header `kind K V M latin`".into(),
        });
    };
    let kind = GraphKind::parse(kind)
        .ok_or(TilingError::Parse { line: header_no, msg: format!("unknown kind {kind}") })?;
    let parse_num = |s: &str| -> Result<u64, TilingError> {
        s.parse()
            .map_err(|_| TilingError::Parse { line: header_no, msg: format!("bad number {s}") })
    };
    let k = parse_num(k)? as u32;
    let v = parse_num(v)?;
    let m = parse_num(m)? as u32;
    let host = HostGraph::build(kind, k, SizeSpec::Vertices(v))?;

    let cells = crate::stratification::pow_usize(k, m);
    let tiles = (v / cells as u64) as usize;
    let mut assignment = vec![(u32::MAX, u32::MAX); v as usize];
    let mut table = vec![u64::MAX; tiles * cells];
    let mut rows = 0u64;
    let mut edges: Option<Vec<(usize, usize)>> = None;

    for (no, line) in lines {
        let no = no + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t == "EDGES" {
            edges = Some(Vec::new());
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match edges.as_mut() {
            None => {
                let [hv, ti, word] = toks.as_slice() else {
                    return Err(TilingError::Parse {
                        line: no,
                        msg: "expected `host tile word`".into(),
                    });
                };
                let hv: u64 = hv.parse().map_err(|_| TilingError::Parse {
                    line: no,
                    msg: format!("bad host index {hv}"),
                })?;
                let ti: u32 = ti.parse().map_err(|_| TilingError::Parse {
                    line: no,
                    msg: format!("bad tile index {ti}"),
                })?;
                let word = Word::parse(word, k)
                    .map_err(|e| TilingError::Parse { line: no, msg: e.to_string() })?;
                if hv >= v || ti as usize >= tiles || word.len() != m as usize {
                    return Err(TilingError::Parse { line: no, msg: "row out of range".into() });
                }
                let x = word.index() as u32;
                assignment[hv as usize] = (ti, x);
                table[ti as usize * cells + x as usize] = hv;
                rows += 1;
            }
            Some(list) => {
                let [a, b] = toks.as_slice() else {
                    return Err(TilingError::Parse { line: no, msg: "expected `word word`".into() });
                };
                let pw = |s: &str| -> Result<usize, TilingError> {
                    let w = Word::parse(s, k)
                        .map_err(|e| TilingError::Parse { line: no, msg: e.to_string() })?;
                    Ok(w.index() as usize)
                };
                list.push((pw(a)?, pw(b)?));
            }
        }
    }

    if rows != v {
        return Err(TilingError::Parse {
            line: 0,
            msg: format!("expected {v} assignment rows, found {rows}"),
        });
    }
    let tile = TileGraph::new(k, m, edges.unwrap_or_default())?;
    Ok(Tiling { host, tile, latin_label: latin.to_string(), assignment, table })
}
