//! Growth of mutual coherence and of a lower bound on the restricted
//! isometry constant with the polynomial degree.

use sparse_pce::experiment::{diagnose_sweep, write_diagnostics_csv, DiagnoseConfig};

fn main() -> sparse_pce::Result<()> {
    let config = DiagnoseConfig {
        rip_trials: 500,
        repeats: 5,
        ..Default::default()
    };
    let rows = diagnose_sweep(&config)?;
    write_diagnostics_csv(&rows, std::io::stdout().lock())
}
