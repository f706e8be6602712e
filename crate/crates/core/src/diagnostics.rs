//! Recoverability measures of a measurement matrix: mutual coherence and a
//! Monte-Carlo lower bound on the restricted isometry constant.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, PceError, Result};

pub const DEFAULT_RIP_TRIALS: usize = 2000;

/// Copy of `phi` with unit-norm columns.
pub fn normalize_columns(phi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = phi.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let n = col.norm();
        if n == 0.0 {
            return Err(PceError::ZeroColumn(j));
        }
        col /= n;
    }
    Ok(out)
}

/// `max_{j≠k} |φ_jᵀφ_k| / (‖φ_j‖‖φ_k‖)`.
pub fn mutual_coherence(phi: &DMatrix<f64>) -> Result<f64> {
    if phi.ncols() < 2 {
        return Err(invalid("coherence needs at least two columns"));
    }
    let u = normalize_columns(phi)?;
    let gram = u.tr_mul(&u);
    let mut mu = 0.0f64;
    for k in 0..gram.ncols() {
        for j in 0..k {
            mu = mu.max(gram[(j, k)].abs());
        }
    }
    Ok(mu.min(1.0))
}

/// `max(1 − λ_min, λ_max − 1)` of the Gram matrix of the unit-norm columns
/// in `subset`.
pub fn subset_isometry_defect(normalized: &DMatrix<f64>, subset: &[usize]) -> f64 {
    let sub = normalized.select_columns(subset.iter());
    let eig = SymmetricEigen::new(sub.tr_mul(&sub));
    let lmin = eig.eigenvalues.min();
    let lmax = eig.eigenvalues.max();
    (1.0 - lmin).max(lmax - 1.0).max(0.0)
}

/// Lower bound on `δ_s` from `n_trials` random column subsets of size `s`.
/// Trial `i` draws its subset from seed `seed + i`, so a longer run extends a
/// shorter one.
pub fn rip_lower_bound(phi: &DMatrix<f64>, s: usize, n_trials: usize, seed: u64) -> Result<f64> {
    let (m, n) = phi.shape();
    if s == 0 || s > m.min(n) {
        return Err(invalid(format!("need 1 <= s <= min(M, N) = {}, got {s}", m.min(n))));
    }
    let u = normalize_columns(phi)?;
    let mut delta = 0.0f64;
    for i in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let subset = rand::seq::index::sample(&mut rng, n, s).into_vec();
        delta = delta.max(subset_isometry_defect(&u, &subset));
    }
    Ok(delta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryDiagnostics {
    pub mutual_coherence: f64,
    pub rip_lower_bound: f64,
    pub s: usize,
    pub n_trials: usize,
    pub seed: u64,
}

pub fn diagnose_matrix(phi: &DMatrix<f64>, s: usize, n_trials: usize, seed: u64) -> Result<RecoveryDiagnostics> {
    Ok(RecoveryDiagnostics {
        mutual_coherence: mutual_coherence(phi)?,
        rip_lower_bound: rip_lower_bound(phi, s, n_trials, seed)?,
        s,
        n_trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthonormal(m: usize, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(m, n, |i, j| {
            ((i * 7 + j * 13) % 11) as f64 - 5.0 + (i == j) as u8 as f64
        });
        a.qr().q()
    }

    #[test]
    fn orthogonal_and_duplicate_columns() {
        let q = orthonormal(8, 5);
        assert!(mutual_coherence(&q).unwrap() < 1e-12);
        assert!(rip_lower_bound(&q, 3, 50, 1).unwrap() < 1e-12);

        let mut d = DMatrix::from_fn(6, 3, |i, j| (i + 2 * j) as f64 + 1.0);
        let c0 = d.column(0).into_owned();
        d.set_column(2, &(c0 * 3.0));
        assert!((mutual_coherence(&d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let mut z = DMatrix::from_element(4, 3, 1.0);
        z.column_mut(1).fill(0.0);
        assert!(matches!(mutual_coherence(&z), Err(PceError::ZeroColumn(1))));
        assert!(mutual_coherence(&DMatrix::from_element(4, 1, 1.0)).is_err());
        assert!(rip_lower_bound(&DMatrix::from_element(3, 5, 1.0), 4, 1, 0).is_err());
    }

    #[test]
    fn single_column_subsets_are_isometric() {
        let a = DMatrix::from_fn(10, 20, |i, j| ((i * 31 + j * 17) % 23) as f64 - 11.0 + 0.5);
        assert!(rip_lower_bound(&a, 1, 100, 5).unwrap() < 1e-12);
    }

    #[test]
    fn two_column_defect_is_the_cosine() {
        // Gram [[1, c], [c, 1]] has eigenvalues 1 ± c
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.0, 0.8]);
        let u = normalize_columns(&a).unwrap();
        assert!((subset_isometry_defect(&u, &[0, 1]) - 0.6).abs() < 1e-14);
        assert!((mutual_coherence(&a).unwrap() - 0.6).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn rip_bound_grows_with_trials(seed in 0u64..1000, n1 in 1usize..20, extra in 0usize..20) {
            let a = DMatrix::from_fn(12, 30, |i, j| (((i + 3) * (j + 5) * 2654435761usize) % 1000) as f64 / 500.0 - 1.0);
            let short = rip_lower_bound(&a, 4, n1, seed).unwrap();
            let long = rip_lower_bound(&a, 4, n1 + extra, seed).unwrap();
            prop_assert!(long >= short);
            prop_assert!(short >= 0.0);
        }

        #[test]
        fn coherence_invariances(scales in proptest::collection::vec(0.1f64..10.0, 6), rot in 0usize..6) {
            let a = DMatrix::from_fn(9, 6, |i, j| ((i * 5 + j * j * 3 + 1) % 13) as f64 - 6.0);
            let mu = mutual_coherence(&a).unwrap();
            let mut b = a.clone();
            for (j, s) in scales.iter().enumerate() {
                b.column_mut(j).scale_mut(*s);
            }
            let perm: Vec<usize> = (0..6).map(|j| (j + rot) % 6).collect();
            let b = b.select_columns(perm.iter());
            let mu_b = mutual_coherence(&b).unwrap();
            prop_assert!((mu - mu_b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&mu));
        }
    }
}
