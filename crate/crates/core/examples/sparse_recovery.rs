//! Exact recovery of a 10-sparse Legendre expansion in d=6 from 120 samples
//! with orthogonal matching pursuit.

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_pce::multiindex::total_degree_set;
use sparse_pce::orthopoly::build_vandermonde;
use sparse_pce::sampling::uniform_design;
use sparse_pce::sparse_solver::{omp_path, select_by_tolerance, OmpOptions};

fn main() -> sparse_pce::Result<()> {
    let set = total_degree_set(6, 4)?;
    let design = uniform_design(120, &[(-1.0, 1.0); 6], 7)?;
    let phi = build_vandermonde(&set, &design.canonical(), &design.family())?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let support = sample(&mut rng, set.len(), 10).into_vec();
    let mut alpha = vec![0.0; set.len()];
    for &j in &support {
        alpha[j] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    let f = &phi * DVector::from_column_slice(&alpha);

    let path = omp_path(&phi, &f, &OmpOptions::default())?;
    for k in 0..=12.min(path.final_step()) {
        println!("step {k:2}: residual {:.3e}", path.residual_norm(k));
    }
    let sel = select_by_tolerance(&path, 1e-10 * f.norm());
    let recovered = path.dense_coeffs(sel.step);
    let err = recovered
        .iter()
        .zip(&alpha)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "N={} M=120: selected {} terms, max coefficient error {err:.2e}",
        set.len(),
        sel.step
    );
    Ok(())
}
