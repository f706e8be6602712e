//! Orthonormal univariate families, tensor-product bases and PCE surrogates.
//!
//! Polynomials are evaluated directly in normalised form through the
//! three-term recurrence `x φₙ = bₙ₊₁ φₙ₊₁ + bₙ φₙ₋₁`, which keeps Hermite
//! values bounded for large degrees.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, PceError, Result};
use crate::multiindex::{IndexSet, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolyKind {
    /// Orthonormal w.r.t. the uniform density 1/2 on [-1, 1].
    Legendre,
    /// Probabilists' Hermite, orthonormal w.r.t. the standard normal density.
    Hermite,
}

impl PolyKind {
    /// Off-diagonal Jacobi coefficient `bₙ`, `n ≥ 1`.
    pub fn recurrence_coeff(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            PolyKind::Legendre => n / (4.0 * n * n - 1.0).sqrt(),
            PolyKind::Hermite => n.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolyKind::Legendre => "legendre",
            PolyKind::Hermite => "hermite",
        }
    }

    /// Whether `x` lies in the support of the orthogonality measure.
    pub fn in_domain(self, x: f64) -> bool {
        match self {
            PolyKind::Legendre => (-1.0..=1.0).contains(&x),
            PolyKind::Hermite => x.is_finite(),
        }
    }

    /// Values `φ₀(x), …, φ_{out.len()-1}(x)`.
    pub fn eval_all(self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        out[1] = x / self.recurrence_coeff(1);
        for n in 1..out.len() - 1 {
            let b_next = self.recurrence_coeff(n + 1);
            let b_n = self.recurrence_coeff(n);
            out[n + 1] = (x * out[n] - b_n * out[n - 1]) / b_next;
        }
    }

    /// Values and first derivatives, degrees `0..vals.len()`.
    pub fn eval_all_with_deriv(self, x: f64, vals: &mut [f64], ders: &mut [f64]) {
        debug_assert_eq!(vals.len(), ders.len());
        if vals.is_empty() {
            return;
        }
        vals[0] = 1.0;
        ders[0] = 0.0;
        if vals.len() == 1 {
            return;
        }
        let b1 = self.recurrence_coeff(1);
        vals[1] = x / b1;
        ders[1] = 1.0 / b1;
        for n in 1..vals.len() - 1 {
            let b_next = self.recurrence_coeff(n + 1);
            let b_n = self.recurrence_coeff(n);
            vals[n + 1] = (x * vals[n] - b_n * vals[n - 1]) / b_next;
            ders[n + 1] = (vals[n] + x * ders[n] - b_n * ders[n - 1]) / b_next;
        }
    }
}

impl fmt::Display for PolyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolyKind {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" | "uniform" => Ok(PolyKind::Legendre),
            "hermite" | "gaussian" | "normal" => Ok(PolyKind::Hermite),
            _ => Err(PceError::Unknown {
                kind: "polynomial family",
                name: s.to_string(),
            }),
        }
    }
}

/// Degree-`n` orthonormal polynomial at `x`.
pub fn eval_1d(kind: PolyKind, n: usize, x: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    kind.eval_all(x, &mut buf);
    buf[n]
}

/// Derivative of the degree-`n` orthonormal polynomial at `x`.
pub fn eval_1d_deriv(kind: PolyKind, n: usize, x: f64) -> f64 {
    let mut vals = vec![0.0; n + 1];
    let mut ders = vec![0.0; n + 1];
    kind.eval_all_with_deriv(x, &mut vals, &mut ders);
    ders[n]
}

/// One polynomial family per input dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFamily {
    kinds: Vec<PolyKind>,
}

impl PolyFamily {
    pub fn new(kinds: Vec<PolyKind>) -> Self {
        Self { kinds }
    }

    pub fn uniform(kind: PolyKind, dim: usize) -> Self {
        Self { kinds: vec![kind; dim] }
    }

    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, n: usize) -> PolyKind {
        self.kinds[n]
    }

    pub fn kinds(&self) -> &[PolyKind] {
        &self.kinds
    }
}

/// Per-dimension affine map `z = (x − shift) / scale` from user space to the
/// canonical domain of the polynomial family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub shift: f64,
    pub scale: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { shift: 0.0, scale: 1.0 };

    /// Maps `[lo, hi]` onto `[-1, 1]`.
    pub fn from_interval(lo: f64, hi: f64) -> Self {
        Affine {
            shift: 0.5 * (lo + hi),
            scale: 0.5 * (hi - lo),
        }
    }

    pub fn to_canonical(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    pub fn to_user(&self, z: f64) -> f64 {
        self.shift + self.scale * z
    }

    /// `dz/dx`
    pub fn chain_factor(&self) -> f64 {
        1.0 / self.scale
    }
}

/// Number of sample coordinates lying outside the family's canonical support.
pub fn count_extrapolated(samples: &DMatrix<f64>, family: &PolyFamily) -> usize {
    let mut count = 0;
    for n in 0..samples.ncols().min(family.dim()) {
        let kind = family.kind(n);
        count += samples.column(n).iter().filter(|&&x| !kind.in_domain(x)).count();
    }
    count
}

/// Sparse form of a multi-index: (dimension, exponent) for nonzero exponents.
fn sparse_terms(set: &IndexSet) -> Vec<Vec<(usize, usize)>> {
    set.iter()
        .map(|m| {
            m.exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(n, &e)| (n, e as usize))
                .collect()
        })
        .collect()
}

/// Univariate values of every dimension at one point, `table[n][k] = φ_k(z_n)`.
struct PointTable {
    vals: Vec<Vec<f64>>,
    ders: Option<Vec<Vec<f64>>>,
}

impl PointTable {
    fn new(z: &[f64], family: &PolyFamily, max_exp: &[u32], with_deriv: bool) -> Self {
        let mut vals = Vec::with_capacity(z.len());
        let mut ders = with_deriv.then(|| Vec::with_capacity(z.len()));
        for (n, &zn) in z.iter().enumerate() {
            let len = max_exp[n] as usize + 1;
            let mut v = vec![0.0; len];
            if let Some(ders) = ders.as_mut() {
                let mut dv = vec![0.0; len];
                family.kind(n).eval_all_with_deriv(zn, &mut v, &mut dv);
                ders.push(dv);
            } else {
                family.kind(n).eval_all(zn, &mut v);
            }
            vals.push(v);
        }
        Self { vals, ders }
    }

    fn value(&self, term: &[(usize, usize)]) -> f64 {
        let mut acc = 1.0;
        for &(n, e) in term {
            acc *= self.vals[n][e];
        }
        acc
    }

    /// `∂φ_λ/∂z_dim` in canonical coordinates.
    fn partial(&self, term: &[(usize, usize)], dim: usize) -> f64 {
        let ders = self.ders.as_ref().expect("derivative table");
        let mut acc = 1.0;
        let mut hit = false;
        for &(n, e) in term {
            if n == dim {
                acc *= ders[n][e];
                hit = true;
            } else {
                acc *= self.vals[n][e];
            }
        }
        if hit {
            acc
        } else {
            0.0
        }
    }
}

fn check_samples(set: &IndexSet, samples: &DMatrix<f64>, family: &PolyFamily) -> Result<()> {
    if samples.ncols() != set.dim() {
        return Err(PceError::DimensionMismatch {
            expected: set.dim(),
            actual: samples.ncols(),
        });
    }
    if family.dim() != set.dim() {
        return Err(PceError::DimensionMismatch {
            expected: set.dim(),
            actual: family.dim(),
        });
    }
    Ok(())
}

/// `φ_λ(ξ) = Π φ_{λₙ}(ξₙ)` at a canonical-domain point.
pub fn basis_eval(index: &MultiIndex, point: &[f64], family: &PolyFamily) -> f64 {
    index
        .exponents()
        .iter()
        .enumerate()
        .map(|(n, &e)| eval_1d(family.kind(n), e as usize, point[n]))
        .product()
}

/// `Φᵢⱼ = φ_{Λⱼ}(ξᵢ)` for canonical-domain samples (one row per sample).
pub fn build_vandermonde(set: &IndexSet, samples: &DMatrix<f64>, family: &PolyFamily) -> Result<DMatrix<f64>> {
    check_samples(set, samples, family)?;
    let outside = count_extrapolated(samples, family);
    if outside > 0 {
        log::warn!("{outside} sample coordinates lie outside the canonical domain");
    }
    let terms = sparse_terms(set);
    let max_exp = set.max_exponents();
    let (m, n) = (samples.nrows(), set.len());
    let mut phi = DMatrix::zeros(m, n);
    let mut z = vec![0.0; set.dim()];
    for i in 0..m {
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = samples[(i, k)];
        }
        let table = PointTable::new(&z, family, &max_exp, false);
        for (j, term) in terms.iter().enumerate() {
            phi[(i, j)] = table.value(term);
        }
    }
    Ok(phi)
}

/// Gradient-enhanced matrix `[Φ; ∂Φ/∂x₁; …; ∂Φ/∂x_d]` of shape `M(d+1) × N`.
///
/// Samples are canonical; derivative blocks are taken with respect to the user
/// coordinates, i.e. scaled by each dimension's `dz/dx`.
pub fn build_gradient_vandermonde(
    set: &IndexSet,
    samples: &DMatrix<f64>,
    family: &PolyFamily,
    transform: &[Affine],
) -> Result<DMatrix<f64>> {
    check_samples(set, samples, family)?;
    if transform.len() != set.dim() {
        return Err(PceError::DimensionMismatch {
            expected: set.dim(),
            actual: transform.len(),
        });
    }
    let d = set.dim();
    let terms = sparse_terms(set);
    let max_exp = set.max_exponents();
    let (m, n) = (samples.nrows(), set.len());
    let mut phi = DMatrix::zeros(m * (d + 1), n);
    let mut z = vec![0.0; d];
    for i in 0..m {
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = samples[(i, k)];
        }
        let table = PointTable::new(&z, family, &max_exp, true);
        for (j, term) in terms.iter().enumerate() {
            phi[(i, j)] = table.value(term);
            for (dim, tr) in transform.iter().enumerate() {
                phi[((dim + 1) * m + i, j)] = table.partial(term, dim) * tr.chain_factor();
            }
        }
    }
    Ok(phi)
}

/// Stacks `[f; ∂f/∂x₁; …; ∂f/∂x_d]` in the row order of
/// [`build_gradient_vandermonde`].
pub fn stack_gradient_responses(values: &DVector<f64>, gradients: &DMatrix<f64>) -> Result<DVector<f64>> {
    let m = values.len();
    if gradients.nrows() != m {
        return Err(PceError::DimensionMismatch {
            expected: m,
            actual: gradients.nrows(),
        });
    }
    let d = gradients.ncols();
    let mut out = DVector::zeros(m * (d + 1));
    out.rows_mut(0, m).copy_from(values);
    for k in 0..d {
        out.rows_mut((k + 1) * m, m).copy_from(&gradients.column(k));
    }
    Ok(out)
}

/// `y = Φα` with a fixed left-to-right summation per row.
pub fn matvec_sequential(phi: &DMatrix<f64>, coeffs: &[f64]) -> Vec<f64> {
    (0..phi.nrows())
        .map(|i| {
            let mut acc = 0.0;
            for (j, &c) in coeffs.iter().enumerate() {
                if c != 0.0 {
                    acc += phi[(i, j)] * c;
                }
            }
            acc
        })
        .collect()
}

/// A fitted expansion `f̂(x) = Σ α_λ φ_λ(z(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PceModel {
    basis: IndexSet,
    coeffs: Vec<f64>,
    family: PolyFamily,
    transform: Vec<Affine>,
}

impl PceModel {
    pub fn new(basis: IndexSet, coeffs: Vec<f64>, family: PolyFamily, transform: Vec<Affine>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(PceError::DimensionMismatch {
                expected: basis.len(),
                actual: coeffs.len(),
            });
        }
        for len in [family.dim(), transform.len()] {
            if len != basis.dim() {
                return Err(PceError::DimensionMismatch {
                    expected: basis.dim(),
                    actual: len,
                });
            }
        }
        Ok(Self {
            basis,
            coeffs,
            family,
            transform,
        })
    }

    /// Zero expansion on an empty basis.
    pub fn zero(family: PolyFamily, transform: Vec<Affine>) -> Self {
        let dim = family.dim();
        Self {
            basis: IndexSet::empty(dim),
            coeffs: Vec::new(),
            family,
            transform,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &IndexSet {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn family(&self) -> &PolyFamily {
        &self.family
    }

    pub fn transform(&self) -> &[Affine] {
        &self.transform
    }

    /// Indices with a nonzero coefficient.
    pub fn support(&self) -> IndexSet {
        let pos: Vec<usize> = (0..self.coeffs.len()).filter(|&j| self.coeffs[j] != 0.0).collect();
        self.basis.select(&pos)
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0.0).count()
    }

    /// Same expansion with zero terms dropped.
    pub fn pruned(&self) -> PceModel {
        let pos: Vec<usize> = (0..self.coeffs.len()).filter(|&j| self.coeffs[j] != 0.0).collect();
        PceModel {
            basis: self.basis.select(&pos),
            coeffs: pos.iter().map(|&j| self.coeffs[j]).collect(),
            family: self.family.clone(),
            transform: self.transform.clone(),
        }
    }

    /// Maps user-space samples to the canonical domain.
    pub fn to_canonical(&self, user: &DMatrix<f64>) -> DMatrix<f64> {
        to_canonical(user, &self.transform)
    }

    /// Evaluates the surrogate at user-space points (one row per point).
    pub fn eval(&self, user: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.eval_canonical(&self.to_canonical(user))
    }

    /// Evaluates the surrogate at canonical-domain points.
    pub fn eval_canonical(&self, samples: &DMatrix<f64>) -> Result<Vec<f64>> {
        check_samples(&self.basis, samples, &self.family)?;
        let terms = sparse_terms(&self.basis);
        let max_exp = self.basis.max_exponents();
        let mut z = vec![0.0; self.dim()];
        let mut out = Vec::with_capacity(samples.nrows());
        for i in 0..samples.nrows() {
            for (k, zk) in z.iter_mut().enumerate() {
                *zk = samples[(i, k)];
            }
            let table = PointTable::new(&z, &self.family, &max_exp, false);
            let mut acc = 0.0;
            for (term, &c) in terms.iter().zip(&self.coeffs) {
                if c != 0.0 {
                    acc += table.value(term) * c;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn mean(&self) -> f64 {
        self.basis
            .position(&MultiIndex::zeros(self.dim()))
            .map_or(0.0, |j| self.coeffs[j])
    }

    pub fn variance(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.coeffs)
            .filter(|(m, _)| !m.is_zero())
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Writes the plain-text model file.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "pce-model 1")?;
        writeln!(w, "dim {}", self.dim())?;
        for n in 0..self.dim() {
            let t = self.transform[n];
            writeln!(w, "x{} {} {:e} {:e}", n + 1, self.family.kind(n), t.shift, t.scale)?;
        }
        writeln!(w, "terms {}", self.basis.len())?;
        for (m, c) in self.basis.iter().zip(&self.coeffs) {
            for e in m.exponents() {
                write!(w, "{e} ")?;
            }
            writeln!(w, "{c:e}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<PceModel> {
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        let mut it = lines.iter().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, message: String| PceError::Parse {
            line: line + 1,
            message,
        };
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| perr(lines.len(), format!("unexpected end of file, expected {what}")))
        };

        let (ln, magic) = next("header")?;
        if !magic.starts_with("pce-model") {
            return Err(perr(ln, "missing `pce-model` header".into()));
        }
        let (ln, dim_line) = next("dim")?;
        let dim: usize = dim_line
            .strip_prefix("dim")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| perr(ln, format!("bad dim line `{dim_line}`")))?;
        let mut kinds = Vec::with_capacity(dim);
        let mut transform = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (ln, l) = next("dimension description")?;
            let tok: Vec<&str> = l.split_whitespace().collect();
            if tok.len() != 4 {
                return Err(perr(ln, format!("bad dimension line `{l}`")));
            }
            kinds.push(tok[1].parse::<PolyKind>()?);
            let shift = tok[2].parse::<f64>().map_err(|e| perr(ln, e.to_string()))?;
            let scale = tok[3].parse::<f64>().map_err(|e| perr(ln, e.to_string()))?;
            transform.push(Affine { shift, scale });
        }
        let (ln, terms_line) = next("terms")?;
        let n_terms: usize = terms_line
            .strip_prefix("terms")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| perr(ln, format!("bad terms line `{terms_line}`")))?;
        let mut pairs = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let (ln, l) = next("term")?;
            let tok: Vec<&str> = l.split_whitespace().collect();
            if tok.len() != dim + 1 {
                return Err(perr(ln, format!("expected {} fields, found {}", dim + 1, tok.len())));
            }
            let exps = tok[..dim]
                .iter()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| perr(ln, e.to_string()))?;
            let c = tok[dim].parse::<f64>().map_err(|e| perr(ln, e.to_string()))?;
            pairs.push((MultiIndex::new(exps), c));
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let basis = IndexSet::from_indices(dim, pairs.iter().map(|p| p.0.clone()))?;
        if basis.len() != pairs.len() {
            return Err(invalid("model file contains duplicate terms"));
        }
        let coeffs = pairs.into_iter().map(|p| p.1).collect();
        PceModel::new(basis, coeffs, PolyFamily::new(kinds), transform)
    }
}

/// Evaluates `model` at user-space points.
pub fn pce_eval(model: &PceModel, user: &DMatrix<f64>) -> Result<Vec<f64>> {
    model.eval(user)
}

/// `(mean, variance)` from orthonormality.
pub fn pce_moments(model: &PceModel) -> (f64, f64) {
    (model.mean(), model.variance())
}

pub fn to_canonical(user: &DMatrix<f64>, transform: &[Affine]) -> DMatrix<f64> {
    let mut out = user.clone();
    for (n, mut col) in out.column_iter_mut().enumerate() {
        let t = transform[n];
        col.apply(|x| *x = t.to_canonical(*x));
    }
    out
}
