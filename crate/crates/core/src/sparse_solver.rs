//! Orthogonal Matching Pursuit with its full greedy solution path.
//!
//! The restricted least-squares problem is kept as a thin QR factorisation
//! that grows by one Gram–Schmidt column (re-orthogonalised when needed) per
//! step, so the whole path costs `O(M N s)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, PceError, Result};

/// Gram-Schmidt is repeated when a column keeps less than this fraction of
/// its norm after one pass.
const REORTHOGONALIZE: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Relative residual decrease below which the path is considered stalled.
const STAGNATION: f64 = 1e-12;
/// A candidate column whose component orthogonal to the current support is
/// smaller than this fraction of its norm is treated as linearly dependent.
const DEPENDENCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct OmpOptions {
    /// Greedy steps to take; `None` means `min(M − 1, N)`.
    pub max_steps: Option<usize>,
    /// Stop once the residual norm is at or below this value.
    pub residual_tol: f64,
}

impl Default for OmpOptions {
    fn default() -> Self {
        Self {
            max_steps: None,
            residual_tol: 0.0,
        }
    }
}

/// Greedy path: step `k` has support `order[..k]`; step 0 is the empty model.
///
/// The path keeps the triangular factor `R` of `Φ_S = QR` and `z = Qᵀf`;
/// the leading `k × k` block of `R` factors the step-`k` support, so the
/// coefficients of any step are one back substitution away.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub order: Vec<usize>,
    /// Residual norm of every step, starting with `‖f‖`.
    pub residual_norms: Vec<f64>,
    r_cols: Vec<Vec<f64>>,
    qtf: Vec<f64>,
    pub ncols: usize,
    /// Set when a selected column turned out numerically dependent on the
    /// current support and had to be skipped.
    pub rank_deficient: bool,
}

impl SolverResult {
    /// Number of greedy steps taken.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn support(&self, step: usize) -> &[usize] {
        &self.order[..step]
    }

    pub fn residual_norm(&self, step: usize) -> f64 {
        self.residual_norms[step]
    }

    pub fn final_step(&self) -> usize {
        self.order.len()
    }

    /// Column `k` of `R` (length `k + 1`).
    pub fn r_column(&self, k: usize) -> &[f64] {
        &self.r_cols[k]
    }

    /// `Qᵀf` restricted to the first `step` columns.
    pub fn qtf(&self, step: usize) -> &[f64] {
        &self.qtf[..step]
    }

    /// Least-squares coefficients at `step`, in selection order.
    pub fn coeffs(&self, step: usize) -> Vec<f64> {
        back_substitute(&self.r_cols[..step], &self.qtf[..step])
    }

    /// Dense coefficient vector of length `ncols` at `step`.
    pub fn dense_coeffs(&self, step: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (&j, c) in self.order[..step].iter().zip(self.coeffs(step)) {
            out[j] = c;
        }
        out
    }
}

/// Path step chosen for a residual tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub step: usize,
    pub converged: bool,
}

/// Runs OMP on `Φα ≈ f`. Columns are normalised for selection only;
/// reported coefficients refer to the original columns. Correlation ties go
/// to the lowest column index.
pub fn omp_path(phi: &DMatrix<f64>, f: &DVector<f64>, opts: &OmpOptions) -> Result<SolverResult> {
    omp_path_observed(phi, f, opts, &mut |_| true)
}

/// [`omp_path`] calling `observer` after every step; the path stops as soon
/// as the observer returns `false`.
pub fn omp_path_observed(
    phi: &DMatrix<f64>,
    f: &DVector<f64>,
    opts: &OmpOptions,
    observer: &mut dyn FnMut(&SolverResult) -> bool,
) -> Result<SolverResult> {
    let (m, n) = phi.shape();
    if f.len() != m {
        return Err(PceError::DimensionMismatch {
            expected: m,
            actual: f.len(),
        });
    }
    if n == 0 || m == 0 {
        return Err(invalid("OMP needs a non-empty matrix"));
    }
    let max_steps = opts.max_steps.unwrap_or(m.saturating_sub(1).min(n)).min(m).min(n);

    let col_norms: Vec<f64> = (0..n).map(|j| phi.column(j).norm()).collect();
    let mut usable: Vec<bool> = col_norms.iter().map(|&c| c > 0.0).collect();

    let mut residual = f.clone();
    let mut rnorm = residual.norm();
    let mut result = SolverResult {
        order: Vec::new(),
        residual_norms: vec![rnorm],
        r_cols: Vec::with_capacity(max_steps),
        qtf: Vec::with_capacity(max_steps),
        ncols: n,
        rank_deficient: false,
    };

    let mut q = DMatrix::<f64>::zeros(m, max_steps);
    let mut corr = DVector::<f64>::zeros(n);

    while result.order.len() < max_steps && rnorm > opts.residual_tol && rnorm > 0.0 {
        corr.gemv_tr(1.0, phi, &residual, 0.0);
        let s = result.order.len();

        // pick, orthogonalise, possibly reject and retry
        let accepted = loop {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if !usable[j] {
                    continue;
                }
                let score = corr[j].abs() / col_norms[j];
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((j, score));
                }
            }
            let Some((j, score)) = best else { break None };
            if score == 0.0 {
                break None;
            }
            usable[j] = false;

            // classical Gram-Schmidt, repeated once when cancellation is severe
            let mut v: DVector<f64> = phi.column(j).into_owned();
            let qs = q.columns(0, s);
            let mut h = qs.tr_mul(&v);
            v.gemv(-1.0, &qs, &h, 1.0);
            let mut nv = v.norm();
            if nv < REORTHOGONALIZE * col_norms[j] {
                let h2 = qs.tr_mul(&v);
                v.gemv(-1.0, &qs, &h2, 1.0);
                h += h2;
                nv = v.norm();
            }
            if nv <= DEPENDENCE * col_norms[j] {
                result.rank_deficient = true;
                log::debug!("OMP: column {j} is dependent on the current support, skipped");
                continue;
            }
            v /= nv;
            let mut rcol: Vec<f64> = h.iter().copied().collect();
            rcol.push(nv);
            break Some((j, v, rcol));
        };
        let Some((j, qcol, rcol)) = accepted else { break };

        let z = qcol.dot(&residual);
        let mut new_res = residual.clone();
        new_res.axpy(-z, &qcol, 1.0);
        let new_norm = new_res.norm();
        if rnorm - new_norm <= STAGNATION * rnorm {
            break;
        }

        q.set_column(s, &qcol);
        result.r_cols.push(rcol);
        result.qtf.push(z);
        result.order.push(j);
        result.residual_norms.push(new_norm);
        residual = new_res;
        rnorm = new_norm;
        if !observer(&result) {
            break;
        }
    }
    Ok(result)
}

/// Solves `R α = z` for upper-triangular `R` given by columns.
fn back_substitute(r_cols: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let s = z.len();
    let mut x = z.to_vec();
    for i in (0..s).rev() {
        for k in i + 1..s {
            x[i] -= r_cols[k][i] * x[k];
        }
        x[i] /= r_cols[i][i];
    }
    x
}

/// Earliest step whose residual norm is at most `eps`; otherwise the final
/// step, flagged as not converged.
pub fn select_by_tolerance(result: &SolverResult, eps: f64) -> Selection {
    match result.residual_norms.iter().position(|&r| r <= eps) {
        Some(step) => Selection { step, converged: true },
        None => Selection {
            step: result.final_step(),
            converged: false,
        },
    }
}

/// Row-scales `Φ` and `f` by `w` for the preconditioned problem `‖WΦα − Wf‖`.
pub fn weight_rows(phi: &DMatrix<f64>, f: &DVector<f64>, w: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if w.len() != phi.nrows() || f.len() != phi.nrows() {
        return Err(PceError::DimensionMismatch {
            expected: phi.nrows(),
            actual: w.len(),
        });
    }
    let mut p = phi.clone();
    for (i, mut row) in p.row_iter_mut().enumerate() {
        row *= w[i];
    }
    let fw = DVector::from_fn(f.len(), |i, _| f[i] * w[i]);
    Ok((p, fw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_single_step() {
        let phi = DMatrix::<f64>::identity(5, 5);
        let mut f = DVector::zeros(5);
        f[2] = 3.0;
        let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res.support(1), &[2]);
        assert_eq!(res.coeffs(1), vec![3.0]);
        assert_eq!(res.residual_norm(1), 0.0);
    }

    #[test]
    fn zero_response_gives_empty_path() {
        let phi = random_matrix(6, 4, 1);
        let res = omp_path(&phi, &DVector::zeros(6), &OmpOptions::default()).unwrap();
        assert!(res.is_empty());
        assert_eq!(res.residual_norm(0), 0.0);
    }

    #[test]
    fn one_sparse_picks_true_column() {
        let phi = random_matrix(30, 12, 2);
        for j in 0..12 {
            let f: DVector<f64> = phi.column(j) * -2.5;
            let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
            assert_eq!(res.support(1), &[j]);
            assert!((res.coeffs(1)[0] + 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let phi = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
        assert_eq!(res.support(1), &[0]);
    }

    #[test]
    fn duplicate_column_is_flagged_not_repeated() {
        // columns 0 and 1 identical; f needs column 2 as well
        let mut phi = random_matrix(8, 3, 4);
        let c0 = phi.column(0).into_owned();
        phi.set_column(1, &c0);
        let f = phi.column(0) * 2.0 + phi.column(2) * 0.5;
        let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
        let mut sup = res.support(res.final_step()).to_vec();
        sup.sort();
        assert!(!sup.contains(&1) || !sup.contains(&0));
        assert!(res.residual_norm(res.final_step()) < 1e-12);
    }

    #[test]
    fn select_examples() {
        let phi = random_matrix(10, 6, 7);
        let f = phi.column(1) * 1.0 + phi.column(4) * 0.3;
        let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
        let sel = select_by_tolerance(&res, f.norm());
        assert_eq!(
            sel,
            Selection {
                step: 0,
                converged: true
            }
        );
        assert!(res.dense_coeffs(0).iter().all(|&c| c == 0.0));
        let sel = select_by_tolerance(&res, 0.0);
        assert_eq!(sel.step, res.final_step());
        let sel = select_by_tolerance(&res, -1.0);
        assert!(!sel.converged);
    }

    #[test]
    fn weighted_rows() {
        let phi = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let f = DVector::from_vec(vec![1.0, 1.0]);
        let (p, fw) = weight_rows(&phi, &f, &[2.0, 0.5]).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[2.0, 4.0, 1.5, 2.0]));
        assert_eq!(fw.as_slice(), &[2.0, 0.5]);
    }

    fn ls_optimality(phi: &DMatrix<f64>, f: &DVector<f64>, res: &SolverResult) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..=res.final_step() {
            let a = DVector::from_vec(res.dense_coeffs(k));
            let r = f - phi * a;
            for &j in res.support(k) {
                worst = worst.max(phi.column(j).dot(&r).abs());
            }
        }
        worst
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn path_invariants(seed in 0u64..10_000, m in 5usize..30, n in 2usize..40) {
            let phi = random_matrix(m, n, seed);
            let f = DVector::from_vec(random_matrix(m, 1, seed + 1).as_slice().to_vec());
            let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
            let mut seen = std::collections::HashSet::new();
            for k in 1..=res.final_step() {
                prop_assert!(res.residual_norm(k) < res.residual_norm(k - 1) + 1e-12);
                prop_assert!(seen.insert(res.order[k - 1]));
                prop_assert_eq!(res.coeffs(k).len(), k);
            }
            prop_assert!(ls_optimality(&phi, &f, &res) <= 1e-10 * f.norm());
        }

        #[test]
        fn scaling_equivariance(seed in 0u64..10_000, c in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64]) {
            let phi = random_matrix(15, 25, seed);
            let f = DVector::from_vec(random_matrix(15, 1, seed + 3).as_slice().to_vec());
            let a = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
            let b = omp_path(&phi, &(&f * c), &OmpOptions::default()).unwrap();
            prop_assert_eq!(&a.order, &b.order);
            for k in 0..=a.final_step() {
                prop_assert!((b.residual_norm(k) - c.abs() * a.residual_norm(k)).abs() <= 1e-9 * f.norm() * c.abs());
                for (x, y) in a.coeffs(k).iter().zip(&b.coeffs(k)) {
                    prop_assert!((y - c * x).abs() <= 1e-8 * (1.0 + (c * x).abs()));
                }
            }
        }

        #[test]
        fn column_permutation_equivariance(seed in 0u64..10_000) {
            let n = 20;
            let phi = random_matrix(12, n, seed);
            let f = DVector::from_vec(random_matrix(12, 1, seed + 5).as_slice().to_vec());
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::seq::SliceRandom;
            perm.shuffle(&mut rng);
            // column k of the permuted matrix is column perm[k] of the original
            let permuted = DMatrix::from_fn(12, n, |i, k| phi[(i, perm[k])]);
            let a = omp_path(&phi, &f, &OmpOptions { max_steps: Some(6), residual_tol: 0.0 }).unwrap();
            let b = omp_path(&permuted, &f, &OmpOptions { max_steps: Some(6), residual_tol: 0.0 }).unwrap();
            let mapped: Vec<usize> = b.order.iter().map(|&k| perm[k]).collect();
            prop_assert_eq!(a.order, mapped);
        }

        #[test]
        fn smaller_tolerance_never_selects_earlier(seed in 0u64..10_000, e1 in 0.0..3.0f64, e2 in 0.0..3.0f64) {
            let phi = random_matrix(10, 15, seed);
            let f = DVector::from_vec(random_matrix(10, 1, seed + 9).as_slice().to_vec());
            let res = omp_path(&phi, &f, &OmpOptions::default()).unwrap();
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(select_by_tolerance(&res, lo).step >= select_by_tolerance(&res, hi).step);
        }
    }
}
