//! Orthonormal Legendre and Hermite polynomials, the measurement matrix and
//! moments of an expansion.

use nalgebra::DMatrix;
use sparse_pce::multiindex::total_degree_set;
use sparse_pce::orthopoly::{build_vandermonde, eval_1d, eval_1d_deriv, Affine, PceModel, PolyFamily, PolyKind};

fn main() -> sparse_pce::Result<()> {
    for kind in [PolyKind::Legendre, PolyKind::Hermite] {
        let vals: Vec<String> = (0..5).map(|n| format!("{:+.4}", eval_1d(kind, n, 0.3))).collect();
        let ders: Vec<String> = (0..5).map(|n| format!("{:+.4}", eval_1d_deriv(kind, n, 0.3))).collect();
        println!("{kind:9} φ_n(0.3)  = {}", vals.join(" "));
        println!("{kind:9} φ'_n(0.3) = {}", ders.join(" "));
    }

    let set = total_degree_set(2, 2)?;
    let family = PolyFamily::new(vec![PolyKind::Legendre, PolyKind::Hermite]);
    let pts = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 0.5, -1.0, -1.0, 2.0]);
    println!(
        "Φ for Legendre × Hermite at three points:\n{:.4}",
        build_vandermonde(&set, &pts, &family)?
    );

    // 1 + 0.5 φ_(1,0) − 0.25 φ_(1,1) on [0,2] × N(3, 0.5²)
    let coeffs = vec![1.0, 0.5, 0.0, 0.0, -0.25, 0.0];
    let transform = vec![Affine::from_interval(0.0, 2.0), Affine { shift: 3.0, scale: 0.5 }];
    let model = PceModel::new(set, coeffs, family, transform)?;
    println!("mean = {}, variance = {}", model.mean(), model.variance());
    let x = DMatrix::from_row_slice(1, 2, &[1.5, 3.5]);
    println!("f̂(1.5, 3.5) = {:.6}", model.eval(&x)?[0]);
    Ok(())
}
