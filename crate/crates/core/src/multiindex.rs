//! Multi-indices and ordered index sets.
//!
//! Every [`IndexSet`] is kept in canonical order: ascending total degree, and
//! within one degree the index with the larger leading exponent first, e.g.
//! `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`. The position of an index in the
//! set is its column in any Vandermonde matrix assembled from that set.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{invalid, PceError, Result};

/// Exponent vector of a tensor-product polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `‖λ‖₁`
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_exponent(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `λ + e_j`
    pub fn incremented(&self, j: usize) -> Self {
        let mut e = self.0.clone();
        e[j] += 1;
        Self(e)
    }

    /// `λ − e_j`, or `None` when `λ_j = 0`.
    pub fn decremented(&self, j: usize) -> Option<Self> {
        if self.0[j] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[j] -= 1;
        Some(Self(e))
    }

    /// The `d` forward neighbours, the `j`-th having entry `j` incremented.
    pub fn forward_neighbors(&self) -> Vec<MultiIndex> {
        (0..self.dim()).map(|j| self.incremented(j)).collect()
    }

    /// Backward neighbours that exist (dimensions with a positive exponent).
    pub fn backward_neighbors(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.dim()).filter_map(move |j| self.decremented(j))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A duplicate-free, canonically ordered set of multi-indices of one dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    dim: usize,
    indices: Vec<MultiIndex>,
}

impl IndexSet {
    /// Builds a set from arbitrary indices, sorting and deduplicating them.
    pub fn from_indices<I>(dim: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = MultiIndex>,
    {
        if dim == 0 {
            return Err(invalid("index set dimension must be at least 1"));
        }
        let mut v: Vec<MultiIndex> = indices.into_iter().collect();
        if let Some(bad) = v.iter().find(|m| m.dim() != dim) {
            return Err(PceError::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self { dim, indices: v })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    /// Column position of `index`, if present.
    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(index).ok()
    }

    pub fn contains(&self, index: &MultiIndex) -> bool {
        self.position(index).is_some()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.dim == other.dim && self.indices.iter().all(|m| other.contains(m))
    }

    pub fn max_degree(&self) -> u32 {
        self.indices.last().map_or(0, MultiIndex::total_degree)
    }

    /// Largest exponent used in each coordinate.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.dim];
        for m in &self.indices {
            for (o, &e) in out.iter_mut().zip(m.exponents()) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// Every backward neighbour of every member is also a member.
    pub fn is_downward_closed(&self) -> bool {
        self.indices
            .iter()
            .all(|m| m.backward_neighbors().all(|b| self.contains(&b)))
    }

    /// Subset at the given column positions.
    pub fn select(&self, positions: &[usize]) -> IndexSet {
        let mut indices: Vec<MultiIndex> = positions.iter().map(|&p| self.indices[p].clone()).collect();
        indices.sort_unstable();
        indices.dedup();
        IndexSet { dim: self.dim, indices }
    }

    pub fn union(&self, other: &IndexSet) -> Result<IndexSet> {
        IndexSet::from_indices(self.dim, self.indices.iter().chain(other.indices.iter()).cloned())
    }

    /// Writes the plain-text form: a `d p` header (dimension and maximum total
    /// degree), then one space-separated exponent vector per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.dim, self.max_degree())?;
        for m in &self.indices {
            let line: Vec<String> = m.exponents().iter().map(u32::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<IndexSet> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(PceError::Parse {
            line: 1,
            message: "empty index set file".into(),
        })?;
        let header = header?;
        let dim: usize = header
            .split_whitespace()
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(PceError::Parse {
                line: 1,
                message: format!("bad header `{header}`"),
            })?;
        let mut indices = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let exps: std::result::Result<Vec<u32>, _> = line.split_whitespace().map(str::parse).collect();
            let exps = exps.map_err(|e| PceError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if exps.len() != dim {
                return Err(PceError::Parse {
                    line: i + 1,
                    message: format!("expected {dim} exponents, found {}", exps.len()),
                });
            }
            indices.push(MultiIndex(exps));
        }
        IndexSet::from_indices(dim, indices)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// All `λ` with `‖λ‖₁ ≤ p`; has `C(d+p, d)` members.
pub fn total_degree_set(d: usize, p: u32) -> Result<IndexSet> {
    check_dim(d)?;
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fill_total_degree(&mut cur, 0, p, &mut out);
    IndexSet::from_indices(d, out)
}

fn fill_total_degree(cur: &mut Vec<u32>, pos: usize, budget: u32, out: &mut Vec<MultiIndex>) {
    if pos == cur.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in 0..=budget {
        cur[pos] = e;
        fill_total_degree(cur, pos + 1, budget - e, out);
    }
    cur[pos] = 0;
}

/// All `λ` with `(Σ λₙ^q)^{1/q} ≤ p`, for `0 < q ≤ 1`.
///
/// Membership is tested as `Σ λₙ^q ≤ p^q` with a relative slack of `1e-12`.
pub fn hyperbolic_set(d: usize, p: u32, q: f64) -> Result<IndexSet> {
    check_dim(d)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("hyperbolic exponent q must lie in (0, 1], got {q}")));
    }
    if q == 1.0 {
        return total_degree_set(d, p);
    }
    let limit = (p as f64).powf(q) * (1.0 + 1e-12);
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fill_hyperbolic(&mut cur, 0, 0.0, p, q, limit, &mut out);
    IndexSet::from_indices(d, out)
}

fn fill_hyperbolic(cur: &mut Vec<u32>, pos: usize, acc: f64, p: u32, q: f64, limit: f64, out: &mut Vec<MultiIndex>) {
    if pos == cur.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in 0..=p {
        let next = acc + if e == 0 { 0.0 } else { (e as f64).powf(q) };
        if next > limit {
            break;
        }
        cur[pos] = e;
        fill_hyperbolic(cur, pos + 1, next, p, q, limit, out);
    }
    cur[pos] = 0;
}

/// `λ + e_j` for `j = 1..d`.
pub fn forward_neighbors(index: &MultiIndex) -> Vec<MultiIndex> {
    index.forward_neighbors()
}

/// Adds to `set` every forward neighbour whose existing backward neighbours
/// are all members of `set`. Only the input set seeds candidates; repeated
/// growth is the caller's loop.
pub fn expand(set: &IndexSet) -> IndexSet {
    let members: HashSet<&MultiIndex> = set.indices.iter().collect();
    let mut added: HashSet<MultiIndex> = HashSet::new();
    for m in &set.indices {
        for cand in m.forward_neighbors() {
            if members.contains(&cand) || added.contains(&cand) {
                continue;
            }
            if cand.backward_neighbors().all(|b| members.contains(&b)) {
                added.insert(cand);
            }
        }
    }
    let mut indices = set.indices.clone();
    indices.extend(added);
    indices.sort_unstable();
    IndexSet { dim: set.dim, indices }
}

/// `C(n, k)` in floating point, exact for the sizes used here.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Size of the total-degree set `Λ^d_{p,1}`.
pub fn total_degree_cardinality(d: usize, p: u32) -> f64 {
    binomial(d as u64 + p as u64, d as u64)
}
