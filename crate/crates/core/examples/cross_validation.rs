//! Cross-validated OMP tolerance on the corner-peak function, compared with
//! the test error along the whole path.

use sparse_pce::benchmarks::{BenchmarkModel, TestSet};
use sparse_pce::crossval::{cv_fit, kfold_partition, FitData};
use sparse_pce::multiindex::total_degree_set;
use sparse_pce::sparse_solver::{omp_path, select_by_tolerance, OmpOptions};

fn main() -> sparse_pce::Result<()> {
    let truth = BenchmarkModel::corner_peak(1, 10)?;
    let design = truth.sample(200, 3, false)?;
    let data = FitData::from_design(&design, false)?;
    let set = total_degree_set(10, 3)?;
    let reg = data.system(&set)?;
    let folds = kfold_partition(200, 10, 3)?;
    let fit = cv_fit(&reg, &folds, 10)?;
    let test = TestSet::lhs(&truth, 5000, 99)?;
    let path = omp_path(&reg.phi, &reg.rhs, &OmpOptions::default())?;

    println!("{:>12} {:>12} {:>12}", "eps", "e_cv", "test_rmse");
    let mut best_test = f64::INFINITY;
    for (i, (&eps, &e)) in fit.curve.levels.iter().zip(&fit.curve.errors).enumerate() {
        let step = select_by_tolerance(&path, eps).step;
        let model = data.model(set.clone(), path.dense_coeffs(step))?;
        let rmse = test.rmse(&model)?;
        best_test = best_test.min(rmse);
        if i % 5 == 0 || i == fit.curve.best {
            let mark = if i == fit.curve.best { "  <- selected" } else { "" };
            println!("{eps:12.3e} {e:12.3e} {rmse:12.3e}{mark}");
        }
    }
    let chosen = test.rmse(&data.model(set, fit.coeffs.clone())?)?;
    println!("selected rmse {chosen:.3e}, best along the path {best_test:.3e}");
    Ok(())
}
