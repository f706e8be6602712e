//! Iterative basis selection against the fixed total-degree sweep on a
//! strongly anisotropic corner-peak function.

use sparse_pce::basis_selection::{basis_selection, nonadaptive_baseline, AdaptOptions, BaselineOptions};
use sparse_pce::benchmarks::{BenchmarkModel, TestSet};
use sparse_pce::crossval::FitData;

fn main() -> sparse_pce::Result<()> {
    env_logger::init();
    let truth = BenchmarkModel::corner_peak(3, 10)?;
    let design = truth.sample(150, 1, false)?;
    let data = FitData::from_design(&design, false)?;
    let test = TestSet::lhs(&truth, 20_000, 5)?;

    let (adaptive, state) = basis_selection(
        &data,
        &AdaptOptions {
            seed: 1,
            ..Default::default()
        },
    )?;
    state.write_trace_csv(std::io::stdout().lock())?;
    let (fixed, report, _) = nonadaptive_baseline(
        &data,
        &BaselineOptions {
            cap: 10_000,
            seed: 1,
            ..Default::default()
        },
    )?;

    println!(
        "basis selection: |Λ|={:4} nnz={:3} rmse={:.3e}",
        adaptive.basis().len(),
        adaptive.nnz(),
        test.rmse(&adaptive)?
    );
    println!(
        "total degree p={}: |Λ|={:4} nnz={:3} rmse={:.3e}",
        report.best_entry().degree.unwrap_or(0),
        fixed.basis().len(),
        fixed.nnz(),
        test.rmse(&fixed)?
    );
    let maxexp = adaptive.support().max_exponents();
    println!("largest exponent per dimension in the adaptive support: {maxexp:?}");
    Ok(())
}
