//! Value-only against gradient-enhanced fits at equal cost, counting a
//! gradient evaluation as one extra unit per sample.

use sparse_pce::experiment::{run_convergence, ExperimentConfig, Method};

fn main() -> sparse_pce::Result<()> {
    let base = ExperimentConfig {
        model: "corner_peak_c2".into(),
        methods: vec![Method::BasisSelection],
        trials: 3,
        ..Default::default()
    };
    let values = run_convergence(&ExperimentConfig {
        sizes: vec![100, 200],
        ..base.clone()
    })?;
    let grads = run_convergence(&ExperimentConfig {
        sizes: vec![50, 100],
        gradients: true,
        ..base
    })?;
    println!("{:>6} {:>14} {:>14}", "cost", "values only", "with gradients");
    for (v, g) in values.summary().iter().zip(grads.summary()) {
        println!("{:>6} {:>14.3e} {:>14.3e}", v.cost, v.mean, g.mean);
    }
    Ok(())
}
