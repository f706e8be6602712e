//! The analytic test models, their gradients and input distributions.

use sparse_pce::benchmarks::{corner_peak_coeffs, BenchmarkModel, BENCHMARK_NAMES};

fn main() -> sparse_pce::Result<()> {
    for r in 1..=3 {
        let c: Vec<String> = corner_peak_coeffs(r, 10)?.iter().map(|c| format!("{c:.2e}")).collect();
        println!("corner peak c{r}: {}", c.join(" "));
    }
    for name in BENCHMARK_NAMES {
        let model = BenchmarkModel::by_name(name, None, Some(3))?;
        let design = model.sample(1, 11, false)?;
        let x = design.row(0);
        let f = model.eval(&x)?;
        let g = model.gradient(&x)?;
        let gnorm = g.as_ref().map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt());
        println!(
            "{:28} f = {f:+.6e}  |∇f| = {}",
            model.to_string(),
            gnorm.map_or("n/a".into(), |v| format!("{v:.3e}"))
        );
    }
    Ok(())
}
