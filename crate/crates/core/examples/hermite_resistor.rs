//! Hermite expansion of the resistor ladder with Gaussian resistances.

use sparse_pce::experiment::{run_convergence, ExperimentConfig, Method};

fn main() -> sparse_pce::Result<()> {
    let config = ExperimentConfig {
        model: "resistor_gaussian".into(),
        stages: Some(20),
        methods: vec![Method::BasisSelection],
        sizes: vec![100, 200],
        trials: 3,
        test_points: 5000,
        ..Default::default()
    };
    let table = run_convergence(&config)?;
    table.write_summary_csv(std::io::stdout().lock())
}
