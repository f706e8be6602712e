//! K-fold cross validation of the OMP residual tolerance and of the basis.
//!
//! Each fold runs one OMP path on its training rows. Fold residuals are
//! rescaled to full-data units by `sqrt(rows / training rows)` and aligned on
//! a shared log-spaced tolerance grid; at every grid level each fold uses
//! the earliest path step meeting the tolerance, and
//! `e_cv = (1/M) Σ_k Σ_{j ∈ fold k} (y_j − f̂^{−k}(x_j))²` over held-out
//! function values.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, PceError, Result};
use crate::multiindex::IndexSet;
use crate::orthopoly::{self, Affine, PceModel, PolyFamily};
use crate::sampling::{self, Design};
use crate::sparse_solver::{omp_path, omp_path_observed, select_by_tolerance, OmpOptions, SolverResult};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_GRID_LEVELS: usize = 50;
const GRID_FLOOR: f64 = 1e-14;

/// Random balanced fold labels in `0..k` for `m` samples.
pub fn kfold_partition(m: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > m {
        return Err(invalid(format!("need 2 <= K <= M, got K={k}, M={m}")));
    }
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut labels = vec![0; m];
    for (pos, &i) in perm.iter().enumerate() {
        labels[i] = pos % k;
    }
    Ok(labels)
}

/// Linear system whose rows are grouped by design sample.
#[derive(Clone, Debug)]
pub struct Regression {
    pub phi: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Design sample each row belongs to.
    pub row_sample: Vec<usize>,
    /// Rows holding function values; held-out error is measured on these.
    pub value_row: Vec<bool>,
    pub n_samples: usize,
}

impl Regression {
    /// Plain value system, one row per sample.
    pub fn values(phi: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if phi.nrows() != rhs.len() {
            return Err(PceError::DimensionMismatch {
                expected: phi.nrows(),
                actual: rhs.len(),
            });
        }
        let m = rhs.len();
        Ok(Self {
            phi,
            rhs,
            row_sample: (0..m).collect(),
            value_row: vec![true; m],
            n_samples: m,
        })
    }

    /// Block-stacked gradient system of `m` samples in `d` dimensions.
    pub fn gradient_enhanced(phi: DMatrix<f64>, rhs: DVector<f64>, m: usize) -> Result<Self> {
        let rows = phi.nrows();
        if rows != rhs.len() || m == 0 || !rows.is_multiple_of(m) {
            return Err(PceError::DimensionMismatch {
                expected: phi.nrows(),
                actual: rhs.len(),
            });
        }
        Ok(Self {
            phi,
            rhs,
            row_sample: (0..rows).map(|r| r % m).collect(),
            value_row: (0..rows).map(|r| r < m).collect(),
            n_samples: m,
        })
    }

    pub fn nrows(&self) -> usize {
        self.phi.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.phi.ncols()
    }
}

/// Everything needed to assemble a [`Regression`] for any candidate basis.
#[derive(Clone, Debug)]
pub struct FitData {
    pub canonical: DMatrix<f64>,
    pub values: DVector<f64>,
    pub gradients: Option<DMatrix<f64>>,
    pub family: PolyFamily,
    pub transform: Vec<Affine>,
    /// Optional per-sample preconditioning weights.
    pub weights: Option<Vec<f64>>,
}

impl FitData {
    /// Uses gradient rows when `use_gradients` is set (and fails if the
    /// design carries none).
    pub fn from_design(design: &Design, use_gradients: bool) -> Result<Self> {
        let values = design.responses()?.clone();
        let gradients = if use_gradients {
            Some(design.gradients()?.clone())
        } else {
            None
        };
        Ok(Self {
            canonical: design.canonical(),
            values,
            gradients,
            family: design.family(),
            transform: design.transforms(),
            weights: None,
        })
    }

    /// Enables Chebyshev preconditioning weights computed from the samples.
    pub fn with_chebyshev_weights(mut self) -> Self {
        self.weights = Some(sampling::chebyshev_weights(&self.canonical));
        self
    }

    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.canonical.ncols()
    }

    pub fn uses_gradients(&self) -> bool {
        self.gradients.is_some()
    }

    pub fn system(&self, set: &IndexSet) -> Result<Regression> {
        let m = self.n_samples();
        let mut reg = match &self.gradients {
            None => {
                let phi = orthopoly::build_vandermonde(set, &self.canonical, &self.family)?;
                Regression::values(phi, self.values.clone())?
            }
            Some(g) => {
                let phi = orthopoly::build_gradient_vandermonde(set, &self.canonical, &self.family, &self.transform)?;
                let rhs = orthopoly::stack_gradient_responses(&self.values, g)?;
                Regression::gradient_enhanced(phi, rhs, m)?
            }
        };
        if let Some(w) = &self.weights {
            for r in 0..reg.nrows() {
                let wi = w[reg.row_sample[r]];
                reg.phi.row_mut(r).scale_mut(wi);
                reg.rhs[r] *= wi;
            }
        }
        Ok(reg)
    }

    pub fn model(&self, set: IndexSet, coeffs: Vec<f64>) -> Result<PceModel> {
        PceModel::new(set, coeffs, self.family.clone(), self.transform.clone())
    }
}

/// Cross-validation error as a function of the tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct CvCurve {
    /// Tolerance levels in full-data units, descending.
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    pub best: usize,
}

impl CvCurve {
    pub fn best_eps(&self) -> f64 {
        self.levels[self.best]
    }

    pub fn best_error(&self) -> f64 {
        self.errors[self.best]
    }
}

/// Per-fold OMP paths and held-out errors at every path step.
#[derive(Clone, Debug)]
pub struct FoldPaths {
    pub paths: Vec<SolverResult>,
    /// `sqrt(rows / training rows)` per fold.
    pub scales: Vec<f64>,
    /// Held-out squared error per fold per path step.
    pub heldout: Vec<Vec<f64>>,
    pub n_samples: usize,
    pub rhs_norm: f64,
}

impl FoldPaths {
    /// `(1/M) Σ_k heldout[k][steps[k]]`.
    pub fn error_at(&self, steps: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (k, &s) in steps.iter().enumerate() {
            acc += self.heldout[k][s];
        }
        acc / self.n_samples as f64
    }

    fn steps_for(&self, eps: f64) -> Vec<usize> {
        self.paths
            .iter()
            .zip(&self.scales)
            .map(|(p, &sc)| select_by_tolerance(p, eps / sc).step)
            .collect()
    }

    /// Shared log-spaced grid from the largest scaled fold residual (the
    /// empty model) down to the smallest one.
    pub fn curve(&self, levels: usize) -> CvCurve {
        let mut hi = self.rhs_norm;
        let mut lo = f64::INFINITY;
        for (p, &sc) in self.paths.iter().zip(&self.scales) {
            hi = hi.max(p.residual_norm(0) * sc);
            lo = lo.min(p.residual_norm(p.final_step()) * sc);
        }
        let lo = lo.max(GRID_FLOOR);
        let grid: Vec<f64> = if hi <= lo || levels < 2 {
            vec![hi]
        } else {
            let (l0, l1) = (hi.ln(), lo.ln());
            (0..levels)
                .map(|i| {
                    if i == 0 {
                        hi
                    } else if i == levels - 1 {
                        lo
                    } else {
                        (l0 + (l1 - l0) * i as f64 / (levels - 1) as f64).exp()
                    }
                })
                .collect()
        };
        let errors: Vec<f64> = grid.iter().map(|&e| self.error_at(&self.steps_for(e))).collect();
        let mut best = 0;
        for (i, &e) in errors.iter().enumerate() {
            if e < errors[best] {
                best = i;
            }
        }
        CvCurve {
            levels: grid,
            errors,
            best,
        }
    }
}

/// Runs one OMP path per fold and records held-out errors along each path.
pub fn fold_paths(reg: &Regression, folds: &[usize], k: usize) -> Result<FoldPaths> {
    if folds.len() != reg.n_samples {
        return Err(PceError::DimensionMismatch {
            expected: reg.n_samples,
            actual: folds.len(),
        });
    }
    let rows = reg.nrows();
    let mut paths = Vec::with_capacity(k);
    let mut scales = Vec::with_capacity(k);
    let mut heldout = Vec::with_capacity(k);
    for fold in 0..k {
        let train: Vec<usize> = (0..rows).filter(|&r| folds[reg.row_sample[r]] != fold).collect();
        let test: Vec<usize> = (0..rows)
            .filter(|&r| reg.value_row[r] && folds[reg.row_sample[r]] == fold)
            .collect();
        if train.is_empty() {
            return Err(invalid(format!("fold {fold} leaves no training rows")));
        }
        let phi_train = reg.phi.select_rows(train.iter());
        let rhs_train = reg.rhs.select_rows(train.iter());
        let phi_test = reg.phi.select_rows(test.iter());
        let rhs_test = reg.rhs.select_rows(test.iter());

        // held-out predictions along the path: with Φ_S = QR the step-s
        // prediction is W[:, ..s] z[..s] where W = Φ_test[:, S] R⁻¹
        let mut w: Vec<DVector<f64>> = Vec::new();
        let mut pred = DVector::<f64>::zeros(test.len());
        let mut errs = vec![rhs_test.norm_squared()];
        let path = omp_path_observed(&phi_train, &rhs_train, &OmpOptions::default(), &mut |p| {
            let s = p.len() - 1;
            let r = p.r_column(s);
            let mut col: DVector<f64> = phi_test.column(p.order[s]).into_owned();
            for (i, wi) in w.iter().enumerate() {
                col.axpy(-r[i], wi, 1.0);
            }
            col /= r[s];
            pred.axpy(p.qtf(s + 1)[s], &col, 1.0);
            w.push(col);
            errs.push((&rhs_test - &pred).norm_squared());
            true
        })?;
        scales.push((rows as f64 / train.len() as f64).sqrt());
        paths.push(path);
        heldout.push(errs);
    }
    Ok(FoldPaths {
        paths,
        scales,
        heldout,
        n_samples: reg.n_samples,
        rhs_norm: reg.rhs.norm(),
    })
}

/// A cross-validated OMP fit on one basis, refit on all rows at the chosen
/// tolerance.
#[derive(Clone, Debug)]
pub struct CvFit {
    pub coeffs: Vec<f64>,
    pub eps: f64,
    pub e_cv: f64,
    pub curve: CvCurve,
    /// Path on all rows used for the final coefficients, run until it meets
    /// the selected tolerance.
    pub full_path: SolverResult,
    pub selected_step: usize,
    pub converged: bool,
    pub rows: usize,
}

impl CvFit {
    pub fn support_size(&self) -> usize {
        self.selected_step
    }
}

/// Cross-validates the tolerance on `reg` and refits on all rows.
pub fn cv_fit(reg: &Regression, folds: &[usize], k: usize) -> Result<CvFit> {
    let fp = fold_paths(reg, folds, k)?;
    let curve = fp.curve(DEFAULT_GRID_LEVELS);
    let opts = OmpOptions {
        residual_tol: curve.best_eps(),
        ..OmpOptions::default()
    };
    let full_path = omp_path(&reg.phi, &reg.rhs, &opts)?;
    let sel = select_by_tolerance(&full_path, curve.best_eps());
    Ok(CvFit {
        coeffs: full_path.dense_coeffs(sel.step),
        eps: curve.best_eps(),
        e_cv: curve.best_error(),
        curve,
        selected_step: sel.step,
        converged: sel.converged,
        rows: reg.nrows(),
        full_path,
    })
}

/// Error curve, best tolerance and its cross-validation error for one basis.
pub fn cv_error(data: &FitData, set: &IndexSet, k: usize, seed: u64) -> Result<(CvCurve, f64, f64)> {
    let folds = kfold_partition(data.n_samples(), k, seed)?;
    let reg = data.system(set)?;
    let curve = fold_paths(&reg, &folds, k)?.curve(DEFAULT_GRID_LEVELS);
    let (eps, e) = (curve.best_eps(), curve.best_error());
    Ok((curve, eps, e))
}

/// One entry of a hyperparameter search.
#[derive(Clone, Debug, PartialEq)]
pub struct CvEntry {
    pub label: String,
    pub degree: Option<u32>,
    pub basis_size: usize,
    pub eps: f64,
    pub e_cv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub entries: Vec<CvEntry>,
    pub best: usize,
    pub seed: u64,
    /// Rows in the fitted system (`M`, or `M(d+1)` with gradients).
    pub rows: usize,
}

impl CvReport {
    pub fn best_entry(&self) -> &CvEntry {
        &self.entries[self.best]
    }

    /// `candidate,degree,basis_size,eps,e_cv`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["candidate", "degree", "basis_size", "eps", "e_cv"])?;
        for (i, e) in self.entries.iter().enumerate() {
            wr.write_record([
                i.to_string(),
                e.degree.map_or(String::new(), |p| p.to_string()),
                e.basis_size.to_string(),
                format!("{:e}", e.eps),
                format!("{:e}", e.e_cv),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Candidate basis for [`select_hyperparams`].
#[derive(Clone, Debug)]
pub struct Candidate {
    pub label: String,
    pub degree: Option<u32>,
    pub set: IndexSet,
}

impl Candidate {
    pub fn total_degree(d: usize, p: u32) -> Result<Self> {
        Ok(Self {
            label: format!("p={p}"),
            degree: Some(p),
            set: crate::multiindex::total_degree_set(d, p)?,
        })
    }
}

/// Cross-validates every candidate basis with one shared partition; returns
/// the report and the winning candidate's fit. Ties go to the earlier
/// candidate.
pub fn select_hyperparams(
    data: &FitData,
    candidates: &[Candidate],
    k: usize,
    seed: u64,
) -> Result<(CvReport, PceModel, CvFit)> {
    if candidates.is_empty() {
        return Err(invalid("no candidate bases"));
    }
    let folds = kfold_partition(data.n_samples(), k, seed)?;
    let mut entries = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, CvFit)> = None;
    let mut rows = 0;
    for (i, c) in candidates.iter().enumerate() {
        let reg = data.system(&c.set)?;
        rows = reg.nrows();
        let fit = cv_fit(&reg, &folds, k)?;
        log::debug!("candidate {} |Λ|={} e_cv={:e}", c.label, c.set.len(), fit.e_cv);
        entries.push(CvEntry {
            label: c.label.clone(),
            degree: c.degree,
            basis_size: c.set.len(),
            eps: fit.eps,
            e_cv: fit.e_cv,
        });
        if best.as_ref().is_none_or(|(_, b)| fit.e_cv < b.e_cv) {
            best = Some((i, fit));
        }
    }
    let (bi, fit) = best.expect("at least one candidate");
    let model = data.model(candidates[bi].set.clone(), fit.coeffs.clone())?;
    Ok((
        CvReport {
            entries,
            best: bi,
            seed,
            rows,
        },
        model,
        fit,
    ))
}

/// Number of folds actually usable for `m` samples.
pub fn effective_folds(m: usize, k: usize) -> usize {
    k.min(m).max(2)
}
