//! Host-graph families and the projection machinery.
//!
//! All four families are *implicit* digraphs: vertices are integers in
//! `[0, V)` and the child/parent sets are computed arithmetically, so a
//! multi-million vertex host costs nothing to "build". Words, mixed-radix
//! codes and Kautz symbol strings are presentation-layer views of the same
//! canonical integer indices.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("vertex count {v} is smaller than the degree {k}")]
    TooFewVertices { v: u64, k: u32 },
    #[error("{kind:?} with K={k} cannot have {v} vertices: cofactor {f} is invalid")]
    KindSizeMismatch { kind: GraphKind, k: u32, v: u64, f: u64 },
    #[error("{kind:?} must be sized by vertex count, not diameter")]
    DiameterNotApplicable { kind: GraphKind },
    #[error("cofactor {f} shares a factor with the degree {k}")]
    CofactorNotCoprime { f: u64, k: u32 },
    #[error("vertex {v} out of range for graph with {max} vertices")]
    VertexOutOfRange { v: u64, max: u64 },
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("not a Latin square: {0}")]
    InvalidLatin(String),
    #[error("tile exponent must satisfy 1 <= M <= N, got M={m}, N={n}")]
    BadTileExponent { m: u32, n: u32 },
}

/// The four supported host-graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    DeBruijn,
    Kautz,
    GeneralizedDeBruijn,
    GeneralizedKautz,
}

impl GraphKind {
    /// True for the two families whose edges use the negated arithmetic rule.
    pub fn is_kautz_family(self) -> bool {
        matches!(self, GraphKind::Kautz | GraphKind::GeneralizedKautz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::DeBruijn => "debruijn",
            GraphKind::Kautz => "kautz",
            GraphKind::GeneralizedDeBruijn => "gdebruijn",
            GraphKind::GeneralizedKautz => "gkautz",
        }
    }

    pub fn parse(s: &str) -> Option<GraphKind> {
        match s {
            "debruijn" | "db" | "de-bruijn" => Some(GraphKind::DeBruijn),
            "kautz" => Some(GraphKind::Kautz),
            "gdebruijn" | "gdb" | "generalized-debruijn" => Some(GraphKind::GeneralizedDeBruijn),
            "gkautz" | "gk" | "generalized-kautz" => Some(GraphKind::GeneralizedKautz),
            _ => None,
        }
    }
}

/// How the size of a host graph is given: word length for the standard
/// families, vertex count for the generalized ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeSpec {
    /// Word length: a de Bruijn graph on `K^N` words of `N` digits, or a
    /// Kautz graph on `(K+1)·K^(N-1)` words of `N` symbols.
    Diameter(u32),
    /// Explicit vertex count, factored as `V = F·K^N`.
    Vertices(u64),
}

/// An implicit host digraph with `V = F·K^N` vertices of uniform in- and
/// out-degree `K`, where `gcd(F, K) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HostGraph {
    kind: GraphKind,
    degree: u32,
    vertices: u64,
    cofactor: u64,
    exponent: u32,
}

fn checked_pow(k: u64, e: u32) -> Option<u64> {
    k.checked_pow(e)
}

/// Split `v` into `f·k^n` with `k` not dividing `f`.
fn factor_out(mut v: u64, k: u64) -> (u64, u32) {
    let mut n = 0;
    while v % k == 0 {
        v /= k;
        n += 1;
    }
    (v, n)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl HostGraph {
    pub fn build(kind: GraphKind, k: u32, size: SizeSpec) -> Result<HostGraph, GraphError> {
        if k < 2 {
            return Err(GraphError::InvalidDegree(k));
        }
        let kd = u64::from(k);
        let (vertices, cofactor, exponent) = match (kind, size) {
            (GraphKind::DeBruijn, SizeSpec::Diameter(n)) => {
                let v = checked_pow(kd, n).ok_or(GraphError::TooFewVertices { v: 0, k })?;
                (v, 1, n)
            }
            (GraphKind::Kautz, SizeSpec::Diameter(d)) => {
                if d == 0 {
                    return Err(GraphError::TooFewVertices { v: 1, k });
                }
                let n = d - 1;
                let v = checked_pow(kd, n)
                    .and_then(|p| p.checked_mul(kd + 1))
                    .ok_or(GraphError::TooFewVertices { v: 0, k })?;
                (v, kd + 1, n)
            }
            (GraphKind::GeneralizedDeBruijn | GraphKind::GeneralizedKautz, SizeSpec::Diameter(_)) => {
                return Err(GraphError::DiameterNotApplicable { kind });
            }
            (_, SizeSpec::Vertices(v)) => {
                let (f, n) = factor_out(v, kd);
                match kind {
                    GraphKind::DeBruijn if f != 1 => {
                        return Err(GraphError::KindSizeMismatch { kind, k, v, f })
                    }
                    GraphKind::Kautz if f != kd + 1 => {
                        return Err(GraphError::KindSizeMismatch { kind, k, v, f })
                    }
                    _ => {}
                }
                (v, f, n)
            }
        };
        if vertices < kd {
            return Err(GraphError::TooFewVertices { v: vertices, k });
        }
        if gcd(cofactor, kd) != 1 {
            return Err(GraphError::CofactorNotCoprime { f: cofactor, k });
        }
        Ok(HostGraph { kind, degree: k, vertices, cofactor, exponent })
    }

    pub fn debruijn(k: u32, n: u32) -> Result<HostGraph, GraphError> {
        HostGraph::build(GraphKind::DeBruijn, k, SizeSpec::Diameter(n))
    }

    /// Standard Kautz graph on words of `diameter` symbols.
    pub fn kautz(k: u32, diameter: u32) -> Result<HostGraph, GraphError> {
        HostGraph::build(GraphKind::Kautz, k, SizeSpec::Diameter(diameter))
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn vertices(&self) -> u64 {
        self.vertices
    }

    /// The cofactor `F` in `V = F·K^N`.
    pub fn cofactor(&self) -> u64 {
        self.cofactor
    }

    /// The K-adic exponent `N` in `V = F·K^N`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn edge_count(&self) -> u64 {
        self.vertices * u64::from(self.degree)
    }

    fn check_vertex(&self, v: u64) -> Result<(), GraphError> {
        if v < self.vertices {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { v, max: self.vertices })
        }
    }

    /// The `K` children of `v`, ordered by the edge parameter `m`.
    ///
    /// De Bruijn families use `(K·v + m) mod V`; Kautz families use
    /// `(-1 - K·v - m) mod V`.
    pub fn children(&self, v: u64) -> Vec<u64> {
        debug_assert!(v < self.vertices);
        let k = u64::from(self.degree);
        let vv = u128::from(self.vertices);
        (0..k)
            .map(|m| {
                let shifted = (u128::from(v) * u128::from(k) + u128::from(m)) % vv;
                if self.kind.is_kautz_family() {
                    ((vv - (shifted + 1) % vv) % vv) as u64
                } else {
                    shifted as u64
                }
            })
            .collect()
    }

    /// The `K` parents of `v`, in ascending vertex order.
    pub fn parents(&self, v: u64) -> Vec<u64> {
        debug_assert!(v < self.vertices);
        let k = u64::from(self.degree);
        let vv = self.vertices;
        let mut out = Vec::with_capacity(self.degree as usize);
        for m in 0..k {
            // u is a parent via parameter m iff K·u ≡ a (mod V).
            let a = if self.kind.is_kautz_family() {
                // -1 - v - m (mod V)
                let t = (u128::from(v) + u128::from(m) + 1) % u128::from(vv);
                ((u128::from(vv) - t) % u128::from(vv)) as u64
            } else {
                // v - m (mod V)
                ((u128::from(v) + u128::from(vv) - u128::from(m) % u128::from(vv))
                    % u128::from(vv)) as u64
            };
            out.extend(solve_linear_congruence(k, a, vv));
        }
        out.sort_unstable();
        out
    }

    /// Mixed-radix code of a vertex: the cofactor digit `f` plus `N` base-K
    /// digits. For Kautz families the digits are returned unbarred.
    pub fn encode(&self, v: u64) -> Result<MixedRadixCode, GraphError> {
        self.check_vertex(v)?;
        let k = u64::from(self.degree);
        let kn = checked_pow(k, self.exponent).expect("V fits in u64");
        let f = v / kn;
        let mut rest = v % kn;
        let mut digits = Vec::with_capacity(self.exponent as usize);
        let mut place = kn;
        for j in 1..=self.exponent {
            place /= k;
            let raw = (rest / place) as u32;
            rest %= place;
            digits.push(self.unbar(j, raw));
        }
        Ok(MixedRadixCode { f, digits })
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, code: &MixedRadixCode) -> Result<u64, GraphError> {
        if code.f >= self.cofactor && !(self.cofactor == 1 && code.f == 0) {
            return Err(GraphError::InvalidWord(format!(
                "cofactor digit {} out of range [0, {})",
                code.f, self.cofactor
            )));
        }
        if code.digits.len() != self.exponent as usize {
            return Err(GraphError::InvalidWord(format!(
                "expected {} digits, got {}",
                self.exponent,
                code.digits.len()
            )));
        }
        let k = u64::from(self.degree);
        let mut v = code.f;
        for (idx, &c) in code.digits.iter().enumerate() {
            if c >= self.degree {
                return Err(GraphError::InvalidWord(format!("digit {c} out of base {}", self.degree)));
            }
            let j = idx as u32 + 1;
            v = v * k + u64::from(self.unbar(j, c));
        }
        Ok(v)
    }

    /// Odd digit positions are stored complemented in Kautz families
    /// (an involution, so it both bars and unbars).
    fn unbar(&self, position: u32, digit: u32) -> u32 {
        if self.kind.is_kautz_family() && position % 2 == 1 {
            self.degree - 1 - digit
        } else {
            digit
        }
    }

    /// The symbol string `s_0 s_1 … s_N` of a standard Kautz vertex.
    /// Only defined when `F = K + 1`.
    pub fn kautz_symbols(&self, v: u64) -> Result<KautzWord, GraphError> {
        if !self.kind.is_kautz_family() || self.cofactor != u64::from(self.degree) + 1 {
            return Err(GraphError::InvalidWord(
                "symbol strings exist only for Kautz graphs with F = K + 1".into(),
            ));
        }
        let code = self.encode(v)?;
        let modulus = self.degree + 1;
        let mut symbols = Vec::with_capacity(self.exponent as usize + 1);
        symbols.push(code.f as u32);
        for &c in &code.digits {
            let prev = *symbols.last().expect("non-empty");
            symbols.push((prev + c + 1) % modulus);
        }
        KautzWord::new(symbols, self.degree)
    }

    /// Graphviz DOT rendering with `index | word` labels
    /// (plus the symbol string for standard Kautz graphs).
    pub fn write_dot<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "digraph {}_{}_{} {{", self.kind.name(), self.degree, self.vertices)?;
        writeln!(w, "  node [shape=box];")?;
        let show_symbols =
            self.kind.is_kautz_family() && self.cofactor == u64::from(self.degree) + 1;
        for v in 0..self.vertices {
            let code = self.encode(v).expect("in range");
            let word = Word::new(code.digits.clone(), self.degree).expect("valid digits");
            if show_symbols {
                let s = self.kautz_symbols(v).expect("standard Kautz");
                writeln!(w, "  v{v} [label=\"{v} | {word} | {s}\"];")?;
            } else {
                writeln!(w, "  v{v} [label=\"{v} | {word}\"];")?;
            }
        }
        for v in 0..self.vertices {
            for c in self.children(v) {
                writeln!(w, "  v{v} -> v{c};")?;
            }
        }
        writeln!(w, "}}")
    }
}

impl fmt::Display for HostGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} K={} V={} (F={}, N={})",
            self.kind.name(),
            self.degree,
            self.vertices,
            self.cofactor,
            self.exponent
        )
    }
}

/// All `u` in `[0, v)` with `k·u ≡ a (mod v)`, ascending.
fn solve_linear_congruence(k: u64, a: u64, v: u64) -> Vec<u64> {
    let g = gcd(k, v);
    if a % g != 0 {
        return Vec::new();
    }
    let (k1, v1, a1) = (k / g, v / g, a / g);
    let inv = mod_inverse(k1, v1);
    let base = ((u128::from(a1) * u128::from(inv)) % u128::from(v1)) as u64;
    (0..g).map(|t| base + t * v1).collect()
}

/// Inverse of `a` modulo `m` (requires `gcd(a, m) = 1`; `m = 1` maps to 0).
fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (i128::from(a), i128::from(m));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "not coprime");
    (old_s.rem_euclid(i128::from(m))) as u64
}

/// The cofactor digit plus unbarred base-K digits of a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadixCode {
    pub f: u64,
    pub digits: Vec<u32>,
}

/// A string of base-K digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    digits: Vec<u32>,
    base: u32,
}

impl Word {
    pub fn new(digits: Vec<u32>, base: u32) -> Result<Word, GraphError> {
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(GraphError::InvalidWord(format!("digit {d} out of base {base}")));
        }
        Ok(Word { digits, base })
    }

    /// Parse from a digit string such as `0121` (single-character digits).
    pub fn parse(s: &str, base: u32) -> Result<Word, GraphError> {
        let digits = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| GraphError::InvalidWord(format!("bad digit character {c:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Word::new(digits, base)
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The canonical integer index of this word (first digit most significant).
    pub fn index(&self) -> u64 {
        self.digits.iter().fold(0u64, |acc, &d| acc * u64::from(self.base) + u64::from(d))
    }

    pub fn from_index(index: u64, base: u32, len: u32) -> Word {
        let mut digits = vec![0u32; len as usize];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % u64::from(base)) as u32;
            rest /= u64::from(base);
        }
        debug_assert_eq!(rest, 0, "index out of range for word length");
        Word { digits, base }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base <= 10 {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.digits.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// A Kautz vertex label: symbols base `K+1` with adjacent symbols distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KautzWord {
    symbols: Vec<u32>,
    degree: u32,
}

impl KautzWord {
    pub fn new(symbols: Vec<u32>, degree: u32) -> Result<KautzWord, GraphError> {
        if let Some(&s) = symbols.iter().find(|&&s| s > degree) {
            return Err(GraphError::InvalidWord(format!(
                "symbol {s} out of base {}",
                degree + 1
            )));
        }
        if symbols.windows(2).any(|w| w[0] == w[1]) {
            return Err(GraphError::InvalidWord("adjacent symbols must be distinct".into()));
        }
        Ok(KautzWord { symbols, degree })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }
}

impl fmt::Display for KautzWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree + 1 <= 10 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Collapse a Kautz word onto a de Bruijn word one digit shorter:
/// `c_i = s_i - s_{i-1} - 1 (mod K+1)`.
pub fn kautz_to_debruijn(w: &KautzWord) -> Word {
    let modulus = w.degree + 1;
    let digits = w
        .symbols
        .windows(2)
        .map(|pair| (pair[1] + modulus - pair[0] + modulus - 1) % modulus)
        .collect();
    // Adjacent-distinctness rules out the value K, so the result is base K.
    Word::new(digits, w.degree).expect("difference digits stay below K")
}

/// A K×K table that is a permutation along every row and every column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    table: Vec<Vec<u32>>,
    k: u32,
    name: String,
}

impl LatinSquare {
    /// `f1(c, c') = (c - c') mod K`, the discrete-differential default.
    pub fn difference(k: u32) -> LatinSquare {
        let table = (0..k).map(|c| (0..k).map(|cp| (c + k - cp) % k).collect()).collect();
        LatinSquare { table, k, name: "f1".into() }
    }

    /// `f2(c, c') = (c + c') mod K`.
    pub fn sum(k: u32) -> LatinSquare {
        let table = (0..k).map(|c| (0..k).map(|cp| (c + cp) % k).collect()).collect();
        LatinSquare { table, k, name: "f2".into() }
    }

    pub fn from_table(table: Vec<Vec<u32>>) -> Result<LatinSquare, GraphError> {
        let k = table.len() as u32;
        if k == 0 {
            return Err(GraphError::InvalidLatin("empty table".into()));
        }
        for (r, row) in table.iter().enumerate() {
            if row.len() as u32 != k {
                return Err(GraphError::InvalidLatin(format!("row {r} has wrong length")));
            }
            let seen: BTreeSet<u32> = row.iter().copied().collect();
            if seen.len() as u32 != k || *seen.iter().next_back().unwrap() >= k {
                return Err(GraphError::InvalidLatin(format!("row {r} is not a permutation")));
            }
        }
        for col in 0..k as usize {
            let seen: BTreeSet<u32> = table.iter().map(|row| row[col]).collect();
            if seen.len() as u32 != k {
                return Err(GraphError::InvalidLatin(format!("column {col} is not a permutation")));
            }
        }
        Ok(LatinSquare { table, k, name: "custom".into() })
    }

    pub fn apply(&self, c: u32, c_prime: u32) -> u32 {
        self.table[c as usize][c_prime as usize]
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// The `k`th discrete differential of a word: `d_i = f(c_{i+k}, c_i)`.
/// Shift 0 is the identity on digits.
pub fn discrete_differential(w: &Word, shift: usize, latin: &LatinSquare) -> Word {
    assert!(shift <= w.len(), "shift exceeds word length");
    assert_eq!(latin.degree(), w.base(), "Latin square base mismatch");
    if shift == 0 {
        return w.clone();
    }
    let c = w.digits();
    let digits = (0..w.len() - shift).map(|i| latin.apply(c[i + shift], c[i])).collect();
    Word::new(digits, w.base()).expect("Latin values stay below K")
}

/// A homomorphism from a host graph onto `B_K^M`, built from the mixed-radix
/// digits followed by a Latin-square discrete differential.
#[derive(Debug, Clone)]
pub struct Projection {
    host: HostGraph,
    m: u32,
    latin: LatinSquare,
}

impl Projection {
    pub fn new(host: HostGraph, m: u32, latin: LatinSquare) -> Result<Projection, GraphError> {
        if m == 0 || m > host.exponent() {
            return Err(GraphError::BadTileExponent { m, n: host.exponent() });
        }
        if latin.degree() != host.degree() {
            return Err(GraphError::InvalidLatin(format!(
                "Latin square has base {}, host degree is {}",
                latin.degree(),
                host.degree()
            )));
        }
        Ok(Projection { host, m, latin })
    }

    pub fn host(&self) -> &HostGraph {
        &self.host
    }

    pub fn tile_exponent(&self) -> u32 {
        self.m
    }

    pub fn latin(&self) -> &LatinSquare {
        &self.latin
    }

    /// Image of a host vertex in `B_K^M`.
    pub fn project(&self, v: u64) -> Word {
        let code = self.host.encode(v).expect("vertex in range");
        let word = Word::new(code.digits, self.host.degree()).expect("valid digits");
        let shift = (self.host.exponent() - self.m) as usize;
        discrete_differential(&word, shift, &self.latin)
    }

    /// Image as a canonical word index in `[0, K^M)`.
    pub fn project_index(&self, v: u64) -> usize {
        self.project(v).index() as usize
    }
}

/// Which of the two distribution properties to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionSide {
    Parent,
    Child,
}

/// Whether `Π(P(u)) = P(Π(u))` (or the child analogue) holds at one vertex.
pub fn distribution_holds_at(
    host: &HostGraph,
    m: u32,
    map: &dyn Fn(u64) -> usize,
    side: DistributionSide,
    u: u64,
) -> bool {
    let tile = HostGraph::debruijn(host.degree(), m).expect("valid tile graph");
    let image = map(u) as u64;
    let (host_nbrs, tile_nbrs) = match side {
        DistributionSide::Parent => (host.parents(u), tile.parents(image)),
        DistributionSide::Child => (host.children(u), tile.children(image)),
    };
    let lhs: BTreeSet<u64> = host_nbrs.iter().map(|&w| map(w) as u64).collect();
    let rhs: BTreeSet<u64> = tile_nbrs.into_iter().collect();
    lhs == rhs
}

/// Verify a distribution property over every host vertex; returns the first
/// vertex where it fails, or `None` if the property holds everywhere.
pub fn check_distribution(
    host: &HostGraph,
    m: u32,
    map: &dyn Fn(u64) -> usize,
    side: DistributionSide,
) -> Option<u64> {
    (0..host.vertices()).find(|&u| !distribution_holds_at(host, m, map, side, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word_of(s: &str, base: u32) -> Word {
        Word::parse(s, base).unwrap()
    }

    #[test]
    fn build_standard_families() {
        let b = HostGraph::debruijn(2, 3).unwrap();
        assert_eq!((b.vertices(), b.cofactor(), b.exponent()), (8, 1, 3));

        let k = HostGraph::kautz(2, 3).unwrap();
        assert_eq!((k.vertices(), k.cofactor(), k.exponent()), (12, 3, 2));

        let g = HostGraph::build(GraphKind::GeneralizedKautz, 3, SizeSpec::Vertices(18)).unwrap();
        assert_eq!((g.cofactor(), g.exponent()), (2, 2));
    }

    #[test]
    fn build_rejections() {
        assert!(HostGraph::build(GraphKind::DeBruijn, 1, SizeSpec::Diameter(3)).is_err());
        // 12 is not a power of 2.
        assert!(matches!(
            HostGraph::build(GraphKind::DeBruijn, 2, SizeSpec::Vertices(12)),
            Err(GraphError::KindSizeMismatch { .. })
        ));
        // V < K.
        assert!(matches!(
            HostGraph::build(GraphKind::GeneralizedDeBruijn, 3, SizeSpec::Vertices(2)),
            Err(GraphError::TooFewVertices { .. })
        ));
        // F = 2 shares a factor with K = 4.
        assert!(matches!(
            HostGraph::build(GraphKind::GeneralizedDeBruijn, 4, SizeSpec::Vertices(8)),
            Err(GraphError::CofactorNotCoprime { .. })
        ));
    }

    #[test]
    fn children_examples() {
        let b = HostGraph::debruijn(2, 3).unwrap();
        assert_eq!(b.children(0b010), vec![0b100, 0b101]);

        let gk = HostGraph::build(GraphKind::GeneralizedKautz, 2, SizeSpec::Vertices(12)).unwrap();
        assert_eq!(gk.children(0), vec![11, 10]);

        let b22 = HostGraph::debruijn(2, 2).unwrap();
        assert_eq!(b22.children(0), vec![0, 1]); // self-loop at 00
    }

    #[test]
    fn parents_examples() {
        let b = HostGraph::debruijn(2, 3).unwrap();
        assert_eq!(b.parents(0b001), vec![0b000, 0b100]);

        let b3 = HostGraph::debruijn(3, 3).unwrap();
        // word 001 has parents 000, 100, 200
        assert_eq!(b3.parents(1), vec![0, 9, 18]);
    }

    #[test]
    fn degree_regularity_and_duality() {
        let hosts = [
            HostGraph::debruijn(2, 3).unwrap(),
            HostGraph::kautz(2, 3).unwrap(),
            HostGraph::kautz(3, 2).unwrap(),
            HostGraph::build(GraphKind::GeneralizedDeBruijn, 2, SizeSpec::Vertices(20)).unwrap(),
            HostGraph::build(GraphKind::GeneralizedKautz, 3, SizeSpec::Vertices(18)).unwrap(),
            HostGraph::build(GraphKind::GeneralizedKautz, 3, SizeSpec::Vertices(5)).unwrap(),
        ];
        for g in &hosts {
            for v in 0..g.vertices() {
                let ch = g.children(v);
                let pa = g.parents(v);
                assert_eq!(ch.len(), g.degree() as usize);
                assert_eq!(pa.len(), g.degree() as usize, "in-degree at {v} of {g}");
                for &w in &pa {
                    assert!(g.children(w).contains(&v), "duality broken at {w}->{v} in {g}");
                }
                for &w in &ch {
                    assert!(g.parents(w).contains(&v));
                }
            }
        }
    }

    #[test]
    fn codec_examples() {
        let b = HostGraph::debruijn(2, 3).unwrap();
        let code = b.encode(5).unwrap();
        assert_eq!((code.f, code.digits.as_slice()), (0, &[1, 0, 1][..]));

        let g = HostGraph::build(GraphKind::GeneralizedDeBruijn, 3, SizeSpec::Vertices(18)).unwrap();
        let code = g.encode(17).unwrap();
        assert_eq!((code.f, code.digits.as_slice()), (1, &[2, 2][..]));

        let gk = HostGraph::build(GraphKind::GeneralizedKautz, 2, SizeSpec::Vertices(12)).unwrap();
        let code = gk.encode(6).unwrap();
        // raw digits (1, 0); position 1 is barred, so c1 = K-1-1 = 0
        assert_eq!((code.f, code.digits.as_slice()), (1, &[0, 0][..]));
    }

    #[test]
    fn codec_round_trip_all_kinds() {
        let hosts = [
            HostGraph::debruijn(2, 6).unwrap(),
            HostGraph::debruijn(3, 4).unwrap(),
            HostGraph::kautz(2, 5).unwrap(),
            HostGraph::kautz(3, 3).unwrap(),
            HostGraph::build(GraphKind::GeneralizedDeBruijn, 2, SizeSpec::Vertices(1400)).unwrap(),
            HostGraph::build(GraphKind::GeneralizedKautz, 3, SizeSpec::Vertices(1377)).unwrap(),
            HostGraph::build(GraphKind::GeneralizedKautz, 5, SizeSpec::Vertices(9375)).unwrap(),
        ];
        for g in &hosts {
            for v in 0..g.vertices() {
                let code = g.encode(v).unwrap();
                assert_eq!(g.decode(&code).unwrap(), v, "round trip failed in {g}");
            }
        }
    }

    #[test]
    fn kautz_cofactor_digit_matches_symbol_head() {
        let k = HostGraph::kautz(2, 3).unwrap();
        for v in 0..k.vertices() {
            let code = k.encode(v).unwrap();
            let s = k.kautz_symbols(v).unwrap();
            assert_eq!(code.f as u32, s.symbols()[0]);
        }
    }

    #[test]
    fn kautz_arithmetic_matches_word_graph() {
        // Arithmetic edges agree with the shift rule on symbol strings.
        for (k, diam) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let g = HostGraph::kautz(k, diam).unwrap();
            for v in 0..g.vertices() {
                let sv = g.kautz_symbols(v).unwrap();
                let got: BTreeSet<Vec<u32>> = g
                    .children(v)
                    .iter()
                    .map(|&c| g.kautz_symbols(c).unwrap().symbols().to_vec())
                    .collect();
                let mut expect = BTreeSet::new();
                let tail = &sv.symbols()[1..];
                for x in 0..=k {
                    if x != *sv.symbols().last().unwrap() {
                        let mut w = tail.to_vec();
                        w.push(x);
                        expect.insert(w);
                    }
                }
                assert_eq!(got, expect, "edge mismatch at vertex {v} of {g}");
            }
        }
    }

    #[test]
    fn kautz_word_collapse() {
        let w = KautzWord::new(vec![0, 1, 2], 2).unwrap();
        assert_eq!(kautz_to_debruijn(&w).digits(), &[0, 0]);

        let w = KautzWord::new(vec![0, 2, 1], 2).unwrap();
        assert_eq!(kautz_to_debruijn(&w).digits(), &[1, 1]);

        let w = KautzWord::new(vec![3, 0, 3], 3).unwrap();
        assert_eq!(kautz_to_debruijn(&w).digits(), &[0, 2]);

        assert!(KautzWord::new(vec![0, 0, 1], 2).is_err());
    }

    #[test]
    fn differential_examples() {
        let f1 = LatinSquare::difference(2);
        let w = word_of("0110", 2);
        assert_eq!(discrete_differential(&w, 0, &f1), w);
        assert_eq!(discrete_differential(&w, 2, &f1).digits(), &[1, 1]);
        assert!(discrete_differential(&w, 4, &f1).is_empty());
    }

    #[test]
    fn latin_square_validation() {
        assert!(LatinSquare::from_table(vec![vec![0, 1], vec![1, 0]]).is_ok());
        assert!(LatinSquare::from_table(vec![vec![0, 1], vec![0, 1]]).is_err());
        for k in [2, 3, 5] {
            LatinSquare::from_table(LatinSquare::difference(k).table.clone()).unwrap();
            LatinSquare::from_table(LatinSquare::sum(k).table.clone()).unwrap();
        }
    }

    #[test]
    fn projection_examples() {
        // Identity when N = M.
        let host = HostGraph::debruijn(2, 2).unwrap();
        let p = Projection::new(host, 2, LatinSquare::difference(2)).unwrap();
        for v in 0..4 {
            assert_eq!(p.project_index(v) as u64, v);
        }

        // B_2^3 -> B_2^2: vertex 010 maps to 11.
        let host = HostGraph::debruijn(2, 3).unwrap();
        let p = Projection::new(host, 2, LatinSquare::difference(2)).unwrap();
        assert_eq!(p.project(0b010).digits(), &[1, 1]);
    }

    #[test]
    fn projection_is_homomorphism_on_b24() {
        let host = HostGraph::debruijn(2, 4).unwrap();
        let p = Projection::new(host, 2, LatinSquare::difference(2)).unwrap();
        let tile = HostGraph::debruijn(2, 2).unwrap();
        for u in 0..host.vertices() {
            for v in host.children(u) {
                let (pu, pv) = (p.project_index(u) as u64, p.project_index(v) as u64);
                assert!(tile.children(pu).contains(&pv), "edge ({u},{v}) does not project");
            }
        }
    }

    #[test]
    fn projection_fibers_are_uniform() {
        let hosts = [
            HostGraph::debruijn(2, 4).unwrap(),
            HostGraph::kautz(2, 3).unwrap(),
            HostGraph::build(GraphKind::GeneralizedKautz, 3, SizeSpec::Vertices(54)).unwrap(),
        ];
        for host in hosts {
            let m = 2;
            let p = Projection::new(host, m, LatinSquare::difference(host.degree())).unwrap();
            let cells = host.degree().pow(m) as usize;
            let mut counts = vec![0u64; cells];
            for v in 0..host.vertices() {
                counts[p.project_index(v)] += 1;
            }
            let expect = host.vertices() / cells as u64;
            assert!(counts.iter().all(|&c| c == expect), "fibers uneven in {host}");
        }
    }

    #[test]
    fn distribution_properties() {
        // The differential projection passes both sides on B_2^4.
        let host = HostGraph::debruijn(2, 4).unwrap();
        let p = Projection::new(host, 2, LatinSquare::difference(2)).unwrap();
        let map = move |v: u64| p.project_index(v);
        assert_eq!(check_distribution(&host, 2, &map, DistributionSide::Parent), None);
        assert_eq!(check_distribution(&host, 2, &map, DistributionSide::Child), None);

        // The contiguous-substring map c1c2c3 -> c2c3 on B_3^3 fails the
        // parent side; vertex 001 is a witness.
        let host = HostGraph::debruijn(3, 3).unwrap();
        let substring = |v: u64| (v % 9) as usize;
        assert!(!distribution_holds_at(&host, 2, &substring, DistributionSide::Parent, 1));
        assert!(check_distribution(&host, 2, &substring, DistributionSide::Parent).is_some());

        // Dropping the cofactor digit of a generalized de Bruijn graph keeps
        // both properties (here N = M so the differential step is trivial).
        let host =
            HostGraph::build(GraphKind::GeneralizedDeBruijn, 3, SizeSpec::Vertices(18)).unwrap();
        let p = Projection::new(host, 2, LatinSquare::difference(3)).unwrap();
        let map = move |v: u64| p.project_index(v);
        assert_eq!(check_distribution(&host, 2, &map, DistributionSide::Parent), None);
        assert_eq!(check_distribution(&host, 2, &map, DistributionSide::Child), None);
    }

    #[test]
    fn distribution_holds_for_all_latin_projections() {
        let hosts = [
            HostGraph::debruijn(3, 3).unwrap(),
            HostGraph::kautz(3, 3).unwrap(),
            HostGraph::build(GraphKind::GeneralizedKautz, 3, SizeSpec::Vertices(36)).unwrap(),
        ];
        for host in hosts {
            for latin in [LatinSquare::difference(3), LatinSquare::sum(3)] {
                let p = Projection::new(host, 2, latin).unwrap();
                let map = move |v: u64| p.project_index(v);
                for side in [DistributionSide::Parent, DistributionSide::Child] {
                    assert_eq!(check_distribution(&host, 2, &map, side), None, "{host}");
                }
            }
        }
    }

    #[test]
    fn dot_export_contains_labels() {
        let g = HostGraph::kautz(2, 2).unwrap();
        let mut buf = Vec::new();
        g.write_dot(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("digraph kautz_2_6"));
        // every vertex labelled with index, word and symbol string
        for v in 0..6 {
            assert!(text.contains(&format!("v{v} [label=\"{v} | ")));
        }
    }

    #[test]
    fn word_index_round_trip() {
        for idx in 0..81 {
            let w = Word::from_index(idx, 3, 4);
            assert_eq!(w.index(), idx);
        }
        assert_eq!(word_of("101", 2).index(), 5);
    }
}
