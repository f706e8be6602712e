//! Multi-trial convergence study of the fixed and adaptive methods; prints
//! the per-size summary as CSV.

use sparse_pce::experiment::{run_convergence, ExperimentConfig, Method};

fn main() -> sparse_pce::Result<()> {
    env_logger::init();
    let config = ExperimentConfig {
        model: "corner_peak_c3".into(),
        methods: vec![Method::Nonadaptive, Method::BasisSelection],
        sizes: vec![50, 100, 150],
        trials: 3,
        ..Default::default()
    };
    let table = run_convergence(&config)?;
    table.write_summary_csv(std::io::stdout().lock())
}
