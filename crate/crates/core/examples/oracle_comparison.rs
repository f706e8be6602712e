//! Oracle basis from a dense least-squares reference, next to the adaptive
//! and fixed methods.

use sparse_pce::experiment::{run_convergence, ExperimentConfig, Method};

fn main() -> sparse_pce::Result<()> {
    env_logger::init();
    let config = ExperimentConfig {
        model: "corner_peak_c3".into(),
        methods: vec![Method::Oracle, Method::BasisSelection, Method::Nonadaptive],
        sizes: vec![150],
        trials: 2,
        reference_samples: 5000,
        reference_terms: 600,
        ..Default::default()
    };
    let table = run_convergence(&config)?;
    table.write_summary_csv(std::io::stdout().lock())
}
