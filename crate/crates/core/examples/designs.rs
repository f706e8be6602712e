//! Random, Latin-hypercube and Chebyshev designs, written as CSV.

use sparse_pce::sampling::{chebyshev_design, lhs_design_in, random_design, Domain};

fn main() -> sparse_pce::Result<()> {
    let domains = vec![
        Domain::Uniform { lo: 0.0, hi: 1.0 },
        Domain::Gaussian { mean: 1.0, std: 0.005 },
    ];
    let random = random_design(5, &domains, 1)?;
    let lhs = lhs_design_in(5, &domains, 1)?;
    let cheb = chebyshev_design(5, &domains[..1], 1)?;

    for (name, d) in [("random", &random), ("latin hypercube", &lhs)] {
        println!("{name}:");
        d.write_csv(std::io::stdout().lock())?;
    }
    let xs: Vec<String> = (0..cheb.len())
        .map(|i| format!("{:.3}", cheb.samples[(i, 0)]))
        .collect();
    println!("chebyshev on [0,1]: {}", xs.join(" "));

    let strata: Vec<usize> = (0..lhs.len()).map(|i| (lhs.samples[(i, 0)] * 5.0) as usize).collect();
    println!("LHS strata used in x1: {strata:?}");
    Ok(())
}
