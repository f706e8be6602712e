//! Iterative basis selection and the two reference strategies it is compared
//! against: a fixed total-degree sweep and an oracle basis taken from a
//! high-accuracy reference expansion.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::crossval::{
    cv_fit, effective_folds, kfold_partition, select_hyperparams, Candidate, CvFit, CvReport, FitData, DEFAULT_FOLDS,
};
use crate::error::{invalid, Result};
use crate::multiindex::{binomial, expand, total_degree_set, IndexSet, MultiIndex};
use crate::orthopoly::{build_vandermonde, PceModel};
use crate::sampling::{random_design, Domain};

/// `Λ_{p,1}` with cardinality closest to `10M`; ties go to the smaller `p`.
pub fn initial_basis(m: usize, d: usize) -> Result<IndexSet> {
    if m == 0 || d == 0 {
        return Err(invalid("initial basis needs M >= 1 and d >= 1"));
    }
    total_degree_set(d, closest_degree(d, 10.0 * m as f64, 1))
}

/// Degree `p >= p_min` whose total-degree cardinality is closest to `target`.
pub fn closest_degree(d: usize, target: f64, p_min: u32) -> u32 {
    let card = |p: u32| binomial((d as u64) + p as u64, d as u64);
    let mut p = p_min;
    while card(p + 1) <= target {
        p += 1;
    }
    if card(p) < target && (card(p + 1) - target) < (target - card(p)) {
        p + 1
    } else {
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptOptions {
    /// Inner expansion steps per outer iteration.
    pub expansions: usize,
    pub folds: usize,
    pub seed: u64,
    pub max_outer: usize,
    /// Inner expansion aborts once `|Λ| > size_factor · M`.
    pub size_factor: usize,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self {
            expansions: 3,
            folds: DEFAULT_FOLDS,
            seed: 0,
            max_outer: 20,
            size_factor: 20,
        }
    }
}

/// One fit of the adaptive loop.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub t: usize,
    pub basis_size: usize,
    pub support_size: usize,
    pub e_cv: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct AdaptState {
    pub iteration: usize,
    pub basis: IndexSet,
    pub coeffs: Vec<f64>,
    pub e_cv: f64,
    pub best_basis: IndexSet,
    pub best_coeffs: Vec<f64>,
    pub best_e_cv: f64,
    pub trace: Vec<TraceRow>,
    /// Restricted sets `Λ^(k,0)`, one per outer iteration.
    pub restrictions: Vec<IndexSet>,
    /// Candidate bases `Λ^(k,t)` grouped by outer iteration.
    pub expansions: Vec<Vec<IndexSet>>,
    /// Set when a restriction came out empty.
    pub degenerate: bool,
    /// Rows of the fitted systems.
    pub rows: usize,
}

impl AdaptState {
    /// `k,t,basis_size,support_size,e_cv,accepted`
    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "t", "basis_size", "support_size", "e_cv", "accepted"])?;
        for r in &self.trace {
            wr.write_record([
                r.k.to_string(),
                r.t.to_string(),
                r.basis_size.to_string(),
                r.support_size.to_string(),
                format!("{:e}", r.e_cv),
                u8::from(r.accepted).to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Accepted `e_cv` values in iteration order.
    pub fn accepted_errors(&self) -> Vec<f64> {
        self.trace.iter().filter(|r| r.accepted).map(|r| r.e_cv).collect()
    }
}

fn nonzero_support(set: &IndexSet, coeffs: &[f64]) -> IndexSet {
    let pos: Vec<usize> = (0..coeffs.len()).filter(|&i| coeffs[i] != 0.0).collect();
    set.select(&pos)
}

#[derive(Clone)]
struct CachedFit {
    coeffs: Vec<f64>,
    e_cv: f64,
    support_size: usize,
}

impl From<CvFit> for CachedFit {
    fn from(fit: CvFit) -> Self {
        Self {
            support_size: fit.support_size(),
            e_cv: fit.e_cv,
            coeffs: fit.coeffs,
        }
    }
}

/// Restrict, expand up to `T` times, keep the best expansion, repeat while
/// the cross-validation error improves.
pub fn basis_selection(data: &FitData, opts: &AdaptOptions) -> Result<(PceModel, AdaptState)> {
    if opts.expansions == 0 {
        return Err(invalid("need at least one expansion step"));
    }
    let m = data.n_samples();
    let k_folds = effective_folds(m, opts.folds);
    let folds = kfold_partition(m, k_folds, opts.seed)?;
    let cap = opts.size_factor.saturating_mul(m);

    let set0 = initial_basis(m, data.dim())?;
    let reg = data.system(&set0)?;
    let fit0 = cv_fit(&reg, &folds, k_folds)?;
    log::info!("initial basis |Λ|={} e_cv={:e}", set0.len(), fit0.e_cv);
    let mut state = AdaptState {
        iteration: 0,
        trace: vec![TraceRow {
            k: 0,
            t: 0,
            basis_size: set0.len(),
            support_size: fit0.support_size(),
            e_cv: fit0.e_cv,
            accepted: false,
        }],
        best_basis: set0.clone(),
        best_coeffs: fit0.coeffs.clone(),
        best_e_cv: fit0.e_cv,
        basis: set0,
        coeffs: fit0.coeffs,
        e_cv: fit0.e_cv,
        restrictions: Vec::new(),
        expansions: Vec::new(),
        degenerate: false,
        rows: reg.nrows(),
    };

    let mut cache: HashMap<IndexSet, CachedFit> = HashMap::new();
    let mut e_star = f64::INFINITY;
    for k in 1..=opts.max_outer {
        state.iteration = k;
        let restricted = nonzero_support(&state.basis, &state.coeffs);
        if restricted.is_empty() {
            log::warn!("restriction at iteration {k} is empty");
            state.degenerate = true;
            break;
        }
        state.restrictions.push(restricted.clone());
        let mut current = restricted;
        let mut grown = Vec::new();
        let mut best: Option<(usize, IndexSet, CachedFit)> = None;
        for t in 1..=opts.expansions {
            current = expand(&current);
            if current.len() > cap {
                log::info!("iteration {k}: |Λ|={} exceeds {cap}, stopping expansion", current.len());
                break;
            }
            grown.push(current.clone());
            let fit = match cache.get(&current) {
                Some(fit) => fit.clone(),
                None => {
                    let fit = CachedFit::from(cv_fit(&data.system(&current)?, &folds, k_folds)?);
                    cache.insert(current.clone(), fit.clone());
                    fit
                }
            };
            log::debug!("k={k} t={t} |Λ|={} e_cv={:e}", current.len(), fit.e_cv);
            state.trace.push(TraceRow {
                k,
                t,
                basis_size: current.len(),
                support_size: fit.support_size,
                e_cv: fit.e_cv,
                accepted: false,
            });
            if best.as_ref().is_none_or(|(_, _, b)| fit.e_cv < b.e_cv) {
                best = Some((state.trace.len() - 1, current.clone(), fit));
            }
        }
        state.expansions.push(grown);
        let Some((row, set, fit)) = best else {
            break;
        };
        if fit.e_cv >= e_star {
            break;
        }
        e_star = fit.e_cv;
        state.trace[row].accepted = true;
        state.basis = set.clone();
        state.coeffs = fit.coeffs.clone();
        state.e_cv = fit.e_cv;
        state.best_basis = set;
        state.best_coeffs = fit.coeffs;
        state.best_e_cv = fit.e_cv;
    }
    let model = data.model(state.best_basis.clone(), state.best_coeffs.clone())?;
    Ok((model, state))
}

/// Candidate degrees `2..=p_max` with `|Λ_{p_max,1}|` closest to `cap`.
/// Returns `[2]` and `false` when the cap is below `|Λ_{2,1}|`.
pub fn nonadaptive_degrees(d: usize, cap: usize) -> (Vec<u32>, bool) {
    if (cap as f64) < binomial(d as u64 + 2, d as u64) {
        return (vec![2], false);
    }
    let p_max = closest_degree(d, cap as f64, 2);
    ((2..=p_max).collect(), true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineOptions {
    pub cap: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            cap: 100_000,
            folds: DEFAULT_FOLDS,
            seed: 0,
        }
    }
}

/// Total-degree sweep; the basis with the lowest cross-validation error
/// wins.
pub fn nonadaptive_baseline(data: &FitData, opts: &BaselineOptions) -> Result<(PceModel, CvReport, CvFit)> {
    let d = data.dim();
    let (degrees, within) = nonadaptive_degrees(d, opts.cap);
    if !within {
        log::warn!("cap {} is below |Λ_2| for d={d}; using p=2 only", opts.cap);
    }
    let candidates = degrees
        .iter()
        .map(|&p| Candidate::total_degree(d, p))
        .collect::<Result<Vec<_>>>()?;
    let k = effective_folds(data.n_samples(), opts.folds);
    let (report, model, fit) = select_hyperparams(data, &candidates, k, opts.seed)?;
    Ok((model, report, fit))
}

/// The `m` largest-magnitude terms of `reference`, padded with its
/// zero-coefficient terms and then with total-degree terms, all in canonical
/// order.
pub fn oracle_basis(reference: &PceModel, m: usize) -> Result<IndexSet> {
    let basis = reference.basis();
    let coeffs = reference.coeffs();
    let mut order: Vec<usize> = (0..basis.len()).filter(|&i| coeffs[i] != 0.0).collect();
    order.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()));
    let mut chosen: Vec<MultiIndex> = order.iter().take(m).map(|&i| basis.get(i).clone()).collect();
    let mut pads = (0..basis.len()).filter(|&i| coeffs[i] == 0.0);
    while chosen.len() < m {
        match pads.next() {
            Some(i) => chosen.push(basis.get(i).clone()),
            None => break,
        }
    }
    let mut set = IndexSet::from_indices(basis.dim(), chosen)?;
    let mut p = 0;
    while set.len() < m {
        for idx in total_degree_set(basis.dim(), p)?.iter() {
            if set.len() + 1 > m {
                break;
            }
            if !set.contains(idx) {
                set = set.union(&IndexSet::from_indices(basis.dim(), [idx.clone()])?)?;
            }
        }
        p += 1;
    }
    Ok(set)
}

/// OMP with cross-validated tolerance on the oracle basis of `reference`.
pub fn oracle_baseline(data: &FitData, reference: &PceModel, folds: usize, seed: u64) -> Result<(PceModel, CvFit)> {
    let m = data.n_samples();
    let set = oracle_basis(reference, m)?;
    let k = effective_folds(m, folds);
    let labels = kfold_partition(m, k, seed)?;
    let fit = cv_fit(&data.system(&set)?, &labels, k)?;
    let model = data.model(set, fit.coeffs.clone())?;
    Ok((model, fit))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOptions {
    pub samples: usize,
    pub max_terms: usize,
    pub rounds: usize,
    /// Terms with `|α| < keep_tol · max |α|` are dropped between rounds.
    pub keep_tol: f64,
    pub seed: u64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            samples: 20_000,
            max_terms: 1500,
            rounds: 8,
            keep_tol: 1e-7,
            seed: 0x5eed,
        }
    }
}

const CHUNK_ROWS: usize = 2048;

/// Least-squares coefficients on `set` via chunked normal equations.
pub fn dense_least_squares(data: &FitData, set: &IndexSet) -> Result<Vec<f64>> {
    let n = set.len();
    let m = data.n_samples();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut start = 0;
    while start < m {
        let rows = CHUNK_ROWS.min(m - start);
        let chunk = data.canonical.rows(start, rows).into_owned();
        let phi = build_vandermonde(set, &chunk, &data.family)?;
        gram.gemm_tr(1.0, &phi, &phi, 1.0);
        rhs.gemv_tr(1.0, &phi, &data.values.rows(start, rows), 1.0);
        start += rows;
    }
    let chol = match gram.clone().cholesky() {
        Some(c) => c,
        None => {
            let ridge = 1e-12 * gram.trace() / n as f64;
            for i in 0..n {
                gram[(i, i)] += ridge;
            }
            gram.cholesky()
                .ok_or_else(|| invalid("reference normal equations are singular"))?
        }
    };
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// High-accuracy reference expansion of `truth` by dense least squares on a
/// large random design, growing the basis around its significant terms.
pub fn dense_reference(
    truth: &(dyn Fn(&[f64]) -> f64 + Sync),
    domains: &[Domain],
    opts: &ReferenceOptions,
) -> Result<PceModel> {
    let d = domains.len();
    let design = random_design(opts.samples, domains, opts.seed)?;
    let values = DVector::from_fn(design.len(), |i, _| truth(&design.row(i)));
    let data = FitData::from_design(&design.with_responses(values)?, false)?;
    let cap = opts.max_terms.min(opts.samples / 4).max(1);

    let mut p = 1;
    while binomial((d + p + 1) as u64, d as u64) <= cap as f64 / 4.0 {
        p += 1;
    }
    let mut set = total_degree_set(d, p as u32)?;
    let mut coeffs = dense_least_squares(&data, &set)?;
    for round in 0..opts.rounds {
        let amax = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let keep: Vec<usize> = (0..coeffs.len())
            .filter(|&i| coeffs[i].abs() >= opts.keep_tol * amax)
            .collect();
        let kept = set.select(&keep);
        let mut ranked: Vec<usize> = keep.clone();
        ranked.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()));
        let core = if kept.len() > cap / 2 {
            set.select(&ranked[..cap / 2])
        } else {
            kept
        };
        let grown = expand(&core);
        let mut next = core.clone();
        for idx in grown.iter() {
            if next.len() >= cap {
                break;
            }
            if !next.contains(idx) {
                next = next.union(&IndexSet::from_indices(d, [idx.clone()])?)?;
            }
        }
        log::debug!("reference round {round}: |Λ|={}", next.len());
        if next == set {
            break;
        }
        set = next;
        coeffs = dense_least_squares(&data, &set)?;
    }
    data.model(set, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::{basis_eval, PolyFamily, PolyKind};
    use crate::sampling::uniform_design;
    use crate::sparse_solver::omp_path;

    #[test]
    fn initial_basis_examples() {
        assert_eq!(initial_basis(1, 2).unwrap().max_degree(), 3);
        assert_eq!(initial_basis(100, 10).unwrap().max_degree(), 4);
        assert_eq!(initial_basis(100, 10).unwrap().len(), 1001);
        // C(50,1) = 50 hits 10M exactly
        assert_eq!(initial_basis(5, 1).unwrap().max_degree(), 49);
        assert!(initial_basis(0, 2).is_err());
    }

    #[test]
    fn closest_degree_matches_brute_force() {
        for d in 1..=8usize {
            for target in [3.0, 10.0, 55.0, 120.0, 1000.0, 1500.0] {
                let mut best = 1u32;
                for p in 1..2000u32 {
                    let c = binomial((d as u64) + p as u64, d as u64);
                    let cb = binomial((d as u64) + best as u64, d as u64);
                    if (c - target).abs() < (cb - target).abs() {
                        best = p;
                    }
                }
                assert_eq!(closest_degree(d, target, 1), best, "d={d} target={target}");
            }
        }
    }

    #[test]
    fn nonadaptive_degree_range() {
        assert_eq!(nonadaptive_degrees(10, 10_000), ((2..=6).collect(), true));
        assert_eq!(nonadaptive_degrees(10, 60), (vec![2], false));
        assert_eq!(nonadaptive_degrees(2, 6).0, vec![2]);
        let (ps, _) = nonadaptive_degrees(6, 100_000);
        assert_eq!(*ps.last().unwrap(), 17);
    }

    fn data_for(m: usize, d: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> FitData {
        let des = uniform_design(m, &vec![(-1.0, 1.0); d], seed).unwrap();
        let vals = DVector::from_fn(m, |i, _| f(&des.row(i)));
        FitData::from_design(&des.with_responses(vals).unwrap(), false).unwrap()
    }

    #[test]
    fn single_basis_function_is_a_fixed_point() {
        let fam = PolyFamily::uniform(PolyKind::Legendre, 3);
        let target = MultiIndex::new(vec![2, 0, 1]);
        let data = data_for(60, 3, 4, |x| basis_eval(&target, x, &fam));
        let (model, state) = basis_selection(&data, &AdaptOptions::default()).unwrap();
        assert!(model.support().contains(&target));
        assert!(state.best_e_cv < 1e-10);
        assert!(!state.degenerate);
    }

    #[test]
    fn adaptive_invariants() {
        let fam = PolyFamily::uniform(PolyKind::Legendre, 4);
        let data = data_for(50, 4, 9, |x| {
            (0.8 * x[0] + 0.3 * x[1]).exp() + 0.1 * basis_eval(&MultiIndex::new(vec![0, 0, 3, 0]), x, &fam)
        });
        let opts = AdaptOptions {
            seed: 3,
            ..Default::default()
        };
        let (_, state) = basis_selection(&data, &opts).unwrap();
        let acc = state.accepted_errors();
        assert!(!acc.is_empty());
        assert!(acc.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(state.best_e_cv, *acc.last().unwrap());
        for (r, grown) in state.restrictions.iter().zip(&state.expansions) {
            let mut prev = r;
            for g in grown {
                assert!(prev.is_subset_of(g));
                prev = g;
            }
        }
        for w in state.trace.windows(2) {
            assert!(w[0].k <= w[1].k);
        }
        let (_, again) = basis_selection(&data, &opts).unwrap();
        assert_eq!(state.trace, again.trace);

        let mut buf = Vec::new();
        state.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,t,basis_size,support_size,e_cv,accepted\n"));
        assert_eq!(text.lines().count(), state.trace.len() + 1);
    }

    #[test]
    fn restriction_stays_in_true_closure() {
        let fam = PolyFamily::uniform(PolyKind::Legendre, 3);
        let truth: Vec<(MultiIndex, f64)> = vec![
            (MultiIndex::new(vec![0, 0, 0]), 1.0),
            (MultiIndex::new(vec![1, 0, 0]), 0.7),
            (MultiIndex::new(vec![2, 0, 0]), -0.4),
            (MultiIndex::new(vec![1, 1, 0]), 0.3),
            (MultiIndex::new(vec![0, 1, 0]), 0.5),
        ];
        let closure = total_degree_set(3, 2).unwrap();
        for seed in 0..3 {
            let data = data_for(80, 3, 100 + seed, |x| {
                truth.iter().map(|(i, c)| c * basis_eval(i, x, &fam)).sum()
            });
            let opts = AdaptOptions {
                expansions: 1,
                seed,
                ..Default::default()
            };
            let (model, state) = basis_selection(&data, &opts).unwrap();
            for r in &state.restrictions[1..] {
                assert!(r.is_subset_of(&closure), "{:?}", r);
            }
            assert!(state.best_e_cv < 1e-10);
            assert_eq!(model.support().len(), truth.len());
        }
    }

    #[test]
    fn degenerate_on_zero_response() {
        let data = data_for(20, 2, 1, |_| 0.0);
        let (model, state) = basis_selection(&data, &AdaptOptions::default()).unwrap();
        assert!(state.degenerate);
        assert_eq!(model.nnz(), 0);
    }

    #[test]
    fn nonadaptive_recovers_cubic() {
        let data = data_for(120, 2, 6, |x| {
            x[0].powi(3) - 2.0 * x[0] * x[1] + 0.5 * x[1] * x[1] - 0.1
        });
        let opts = BaselineOptions {
            cap: 200,
            ..Default::default()
        };
        let (model, report, _) = nonadaptive_baseline(&data, &opts).unwrap();
        assert!(report.best_entry().degree.unwrap() >= 3);
        let test = uniform_design(500, &[(-1.0, 1.0); 2], 99).unwrap();
        let pred = model.eval(&test.samples).unwrap();
        let mut se = 0.0;
        for (i, p) in pred.iter().enumerate() {
            let x = test.row(i);
            let t = x[0].powi(3) - 2.0 * x[0] * x[1] + 0.5 * x[1] * x[1] - 0.1;
            se += (p - t).powi(2);
        }
        assert!((se / 500.0).sqrt() < 1e-8);
    }

    #[test]
    fn nonadaptive_with_tiny_cap_uses_quadratic() {
        let data = data_for(30, 3, 2, |x| x[0] + x[1] * x[2]);
        let opts = BaselineOptions {
            cap: 5,
            ..Default::default()
        };
        let (_, report, _) = nonadaptive_baseline(&data, &opts).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].degree, Some(2));
    }

    fn model_with(coeffs: Vec<f64>) -> PceModel {
        let set = total_degree_set(2, 2).unwrap();
        PceModel::new(
            set,
            coeffs,
            PolyFamily::uniform(PolyKind::Legendre, 2),
            vec![crate::orthopoly::Affine::IDENTITY; 2],
        )
        .unwrap()
    }

    #[test]
    fn oracle_basis_rules() {
        // canonical order: (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)
        let r = model_with(vec![0.0, 3.0, 0.0, -5.0, 1.0, 0.0]);
        let exact = oracle_basis(&r, 3).unwrap();
        assert_eq!(exact, r.support());

        let two = oracle_basis(&r, 2).unwrap();
        assert!(two.contains(&MultiIndex::new(vec![2, 0])));
        assert!(two.contains(&MultiIndex::new(vec![1, 0])));

        let padded = oracle_basis(&r, 5).unwrap();
        assert!(padded.contains(&MultiIndex::new(vec![0, 0])));
        assert!(padded.contains(&MultiIndex::new(vec![0, 1])));
        assert!(!padded.contains(&MultiIndex::new(vec![0, 2])));

        let beyond = oracle_basis(&r, 8).unwrap();
        assert_eq!(beyond.len(), 8);
        assert!(beyond.contains(&MultiIndex::new(vec![3, 0])));
        assert!(beyond.contains(&MultiIndex::new(vec![2, 1])));
    }

    #[test]
    fn dense_least_squares_matches_omp_full_path() {
        let data = data_for(200, 2, 5, |x| (x[0] - 0.3 * x[1]).sin());
        let set = total_degree_set(2, 4).unwrap();
        let ls = dense_least_squares(&data, &set).unwrap();
        let phi = build_vandermonde(&set, &data.canonical, &data.family).unwrap();
        let path = omp_path(&phi, &data.values, &Default::default()).unwrap();
        let full = path.dense_coeffs(path.final_step());
        assert_eq!(path.final_step(), set.len());
        for (a, b) in ls.iter().zip(&full) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn dense_reference_reproduces_polynomial() {
        let fam = PolyFamily::uniform(PolyKind::Legendre, 3);
        let truth = |x: &[f64]| {
            1.0 + 0.5 * basis_eval(&MultiIndex::new(vec![3, 0, 0]), x, &fam)
                + 0.2 * basis_eval(&MultiIndex::new(vec![0, 2, 1]), x, &fam)
        };
        let domains = vec![Domain::Uniform { lo: -1.0, hi: 1.0 }; 3];
        let opts = ReferenceOptions {
            samples: 2000,
            max_terms: 200,
            ..Default::default()
        };
        let r = dense_reference(&truth, &domains, &opts).unwrap();
        let pos = r.basis().position(&MultiIndex::new(vec![3, 0, 0])).unwrap();
        assert!((r.coeffs()[pos] - 0.5).abs() < 1e-10);
        let pos = r.basis().position(&MultiIndex::new(vec![0, 2, 1])).unwrap();
        assert!((r.coeffs()[pos] - 0.2).abs() < 1e-10);
    }
}
