//! Analytic test models with exact gradients: the Genz corner-peak function,
//! a forced damped oscillator and a resistor ladder network.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, PceError, Result};
use crate::orthopoly::PceModel;
use crate::sampling::{lhs_design_in, random_design, Design, Domain};

/// `(1 + Σ c_k ξ_k)^{−(d+1)}`.
pub fn corner_peak(c: &[f64], xi: &[f64]) -> f64 {
    let d = c.len() as i32;
    let s = 1.0 + c.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
    s.powi(-(d + 1))
}

/// `∂f/∂ξ_k = −(d+1) c_k (1 + Σ c_j ξ_j)^{−(d+2)}`.
pub fn corner_peak_gradient(c: &[f64], xi: &[f64]) -> Vec<f64> {
    let d = c.len() as i32;
    let s = 1.0 + c.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
    let g = -(d as f64 + 1.0) * s.powi(-(d + 2));
    c.iter().map(|ck| g * ck).collect()
}

/// Coefficients of the three anisotropy regimes, scaled to sum to 0.25.
pub fn corner_peak_coeffs(regime: u8, d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("corner peak needs d >= 1"));
    }
    let raw: Vec<f64> = (1..=d)
        .map(|k| {
            let k = k as f64;
            match regime {
                1 => Ok((k - 0.5) / d as f64),
                2 => Ok(1.0 / (k * k)),
                3 => Ok((k * 1e-8f64.ln() / d as f64).exp()),
                _ => Err(invalid(format!("corner peak regime must be 1, 2 or 3, got {regime}"))),
            }
        })
        .collect::<Result<_>>()?;
    let sum: f64 = raw.iter().sum();
    Ok(raw.iter().map(|c| 0.25 * c / sum).collect())
}

/// Input ranges of `(γ, k, f, ω, x₀, x₁)`.
pub const OSCILLATOR_RANGES: [(f64, f64); 6] = [
    (0.08, 0.12),
    (0.03, 0.04),
    (0.08, 0.12),
    (0.8, 1.2),
    (0.45, 0.55),
    (-0.05, 0.05),
];
pub const OSCILLATOR_TIME: f64 = 20.0;

/// Displacement at time `t` of `x'' + γx' + kx = f cos(ωt)`, `x(0) = x₀`,
/// `x'(0) = x₁`, for the underdamped case.
pub fn oscillator_at(xi: &[f64], t: f64) -> Result<f64> {
    if xi.len() != 6 {
        return Err(PceError::DimensionMismatch {
            expected: 6,
            actual: xi.len(),
        });
    }
    let (gamma, k, f, omega, x0, x1) = (xi[0], xi[1], xi[2], xi[3], xi[4], xi[5]);
    if gamma * gamma >= 4.0 * k {
        return Err(invalid(format!(
            "oscillator is not underdamped: γ²={} >= 4k={}",
            gamma * gamma,
            4.0 * k
        )));
    }
    let detune = k - omega * omega;
    let den = detune * detune + (gamma * omega).powi(2);
    if den == 0.0 {
        return Err(invalid("oscillator forcing is resonant"));
    }
    let a = f * detune / den;
    let b = f * gamma * omega / den;
    let wd = (k - gamma * gamma / 4.0).sqrt();
    let c1 = x0 - a;
    let c2 = (x1 + gamma * c1 / 2.0 - b * omega) / wd;
    let hom = (-gamma * t / 2.0).exp() * (c1 * (wd * t).cos() + c2 * (wd * t).sin());
    Ok(hom + a * (omega * t).cos() + b * (omega * t).sin())
}

pub fn oscillator(xi: &[f64]) -> Result<f64> {
    oscillator_at(xi, OSCILLATOR_TIME)
}

/// Output voltage of a ladder of `P = r.len()/2` stages driven by `V₀ = 1`
/// and its gradient with respect to the resistances. Stage `i` is a series
/// resistor `r[2i]` followed by a shunt `r[2i+1]` to ground; the output is
/// the last node.
pub fn resistor_network(r: &[f64]) -> Result<(f64, Vec<f64>)> {
    if r.is_empty() || !r.len().is_multiple_of(2) {
        return Err(invalid(format!(
            "resistor ladder needs an even number of resistances, got {}",
            r.len()
        )));
    }
    if let Some(bad) = r.iter().find(|&&x| !(x > 0.0)) {
        return Err(invalid(format!("resistances must be positive, got {bad}")));
    }
    let p = r.len() / 2;
    let gs: Vec<f64> = (0..p).map(|i| 1.0 / r[2 * i]).collect();
    let gh: Vec<f64> = (0..p).map(|i| 1.0 / r[2 * i + 1]).collect();
    let diag: Vec<f64> = (0..p)
        .map(|i| gs[i] + gh[i] + if i + 1 < p { gs[i + 1] } else { 0.0 })
        .collect();
    let off: Vec<f64> = (1..p).map(|i| -gs[i]).collect();
    let mut rhs = vec![0.0; p];
    rhs[0] = gs[0];
    let v = thomas(&diag, &off, &rhs);
    let mut unit = vec![0.0; p];
    unit[p - 1] = 1.0;
    let lam = thomas(&diag, &off, &unit);

    // dV/dg = −(λ_a − λ_b)(v_a − v_b) with λ = 0 at the source and ground
    let mut grad = vec![0.0; 2 * p];
    for i in 0..p {
        let (v_prev, l_prev) = if i == 0 { (1.0, 0.0) } else { (v[i - 1], lam[i - 1]) };
        let dg_series = -(l_prev - lam[i]) * (v_prev - v[i]);
        let dg_shunt = -lam[i] * v[i];
        grad[2 * i] = -dg_series * gs[i] * gs[i];
        grad[2 * i + 1] = -dg_shunt * gh[i] * gh[i];
    }
    Ok((v[p - 1], grad))
}

/// Solves a symmetric tridiagonal system with diagonal `diag` and
/// off-diagonal `off`.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        c[i] = if i + 1 < n { off[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

pub const RESISTOR_SPREAD: f64 = 0.1;
pub const RESISTOR_GAUSSIAN_STD: f64 = 0.005;
pub const DEFAULT_CORNER_PEAK_DIM: usize = 10;
pub const DEFAULT_STAGES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum BenchmarkKind {
    CornerPeak { regime: u8, coeffs: Vec<f64> },
    Oscillator,
    Resistor { stages: usize },
    Constant { value: f64 },
}

/// A named test function together with its input distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkModel {
    pub name: String,
    pub kind: BenchmarkKind,
    pub domains: Vec<Domain>,
}

pub const BENCHMARK_NAMES: [&str; 7] = [
    "corner_peak_c1",
    "corner_peak_c2",
    "corner_peak_c3",
    "oscillator",
    "resistor",
    "resistor_gaussian",
    "constant",
];

impl BenchmarkModel {
    pub fn corner_peak(regime: u8, d: usize) -> Result<Self> {
        Ok(Self {
            name: format!("corner_peak_c{regime}"),
            kind: BenchmarkKind::CornerPeak {
                regime,
                coeffs: corner_peak_coeffs(regime, d)?,
            },
            domains: vec![Domain::Uniform { lo: 0.0, hi: 1.0 }; d],
        })
    }

    pub fn oscillator() -> Self {
        Self {
            name: "oscillator".into(),
            kind: BenchmarkKind::Oscillator,
            domains: OSCILLATOR_RANGES
                .iter()
                .map(|&(lo, hi)| Domain::Uniform { lo, hi })
                .collect(),
        }
    }

    pub fn resistor(stages: usize) -> Result<Self> {
        if stages == 0 {
            return Err(invalid("resistor ladder needs at least one stage"));
        }
        Ok(Self {
            name: "resistor".into(),
            kind: BenchmarkKind::Resistor { stages },
            domains: vec![
                Domain::Uniform {
                    lo: 1.0 - RESISTOR_SPREAD,
                    hi: 1.0 + RESISTOR_SPREAD,
                };
                2 * stages
            ],
        })
    }

    pub fn resistor_gaussian(stages: usize) -> Result<Self> {
        let mut m = Self::resistor(stages)?;
        m.name = "resistor_gaussian".into();
        m.domains = vec![
            Domain::Gaussian {
                mean: 1.0,
                std: RESISTOR_GAUSSIAN_STD,
            };
            2 * stages
        ];
        Ok(m)
    }

    pub fn constant(d: usize, value: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("constant model needs d >= 1"));
        }
        Ok(Self {
            name: "constant".into(),
            kind: BenchmarkKind::Constant { value },
            domains: vec![Domain::Uniform { lo: -1.0, hi: 1.0 }; d],
        })
    }

    /// Registry lookup. `dim` sets `d` for the corner peak and constant
    /// models; `stages` sets `P` for the resistor ladders.
    pub fn by_name(name: &str, dim: Option<usize>, stages: Option<usize>) -> Result<Self> {
        let d = dim.unwrap_or(DEFAULT_CORNER_PEAK_DIM);
        let p = stages.unwrap_or(DEFAULT_STAGES);
        match name {
            "corner_peak_c1" => Self::corner_peak(1, d),
            "corner_peak_c2" => Self::corner_peak(2, d),
            "corner_peak_c3" => Self::corner_peak(3, d),
            "oscillator" => match dim {
                Some(d) if d != 6 => Err(invalid(format!("oscillator has d=6, got {d}"))),
                _ => Ok(Self::oscillator()),
            },
            "resistor" => Self::resistor(p),
            "resistor_gaussian" => Self::resistor_gaussian(p),
            "constant" => Self::constant(d, 1.0),
            _ => Err(PceError::Unknown {
                kind: "model",
                name: name.into(),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.domains.len()
    }

    pub fn has_gradient(&self) -> bool {
        !matches!(self.kind, BenchmarkKind::Oscillator)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        match &self.kind {
            BenchmarkKind::CornerPeak { coeffs, .. } => Ok(corner_peak(coeffs, x)),
            BenchmarkKind::Oscillator => oscillator(x),
            BenchmarkKind::Resistor { .. } => Ok(resistor_network(x)?.0),
            BenchmarkKind::Constant { value } => Ok(*value),
        }
    }

    /// Gradient with respect to the user coordinates, if the model has one.
    pub fn gradient(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        if x.len() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(match &self.kind {
            BenchmarkKind::CornerPeak { coeffs, .. } => Some(corner_peak_gradient(coeffs, x)),
            BenchmarkKind::Oscillator => None,
            BenchmarkKind::Resistor { .. } => Some(resistor_network(x)?.1),
            BenchmarkKind::Constant { .. } => Some(vec![0.0; self.dim()]),
        })
    }

    /// Attaches responses (and gradients if requested) to `design`.
    pub fn evaluate(&self, design: Design, with_gradients: bool) -> Result<Design> {
        if design.dim() != self.dim() {
            return Err(PceError::DimensionMismatch {
                expected: self.dim(),
                actual: design.dim(),
            });
        }
        let m = design.len();
        let mut f = DVector::zeros(m);
        let mut g = DMatrix::zeros(if with_gradients { m } else { 0 }, self.dim());
        for i in 0..m {
            let x = design.row(i);
            f[i] = self.eval(&x)?;
            if with_gradients {
                let gi = self.gradient(&x)?.ok_or(PceError::MissingGradients)?;
                g.row_mut(i).copy_from_slice(&gi);
            }
        }
        let design = design.with_responses(f)?;
        if with_gradients {
            design.with_gradients(g)
        } else {
            Ok(design)
        }
    }

    /// Random design of `m` evaluated samples.
    pub fn sample(&self, m: usize, seed: u64, with_gradients: bool) -> Result<Design> {
        self.evaluate(random_design(m, &self.domains, seed)?, with_gradients)
    }
}

impl fmt::Display for BenchmarkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (d={})", self.name, self.dim())
    }
}

/// Latin-hypercube test points with the truth evaluated once.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub points: DMatrix<f64>,
    pub values: Vec<f64>,
}

impl TestSet {
    pub fn lhs(truth: &BenchmarkModel, q: usize, seed: u64) -> Result<Self> {
        let design = lhs_design_in(q, &truth.domains, seed)?;
        let values = (0..q).map(|i| truth.eval(&design.row(i))).collect::<Result<_>>()?;
        Ok(Self {
            points: design.samples,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sqrt((1/Q) Σ (f̂ − f)²)`.
    pub fn rmse(&self, model: &PceModel) -> Result<f64> {
        let pred = model.pruned().eval(&self.points)?;
        let se: f64 = pred.iter().zip(&self.values).map(|(p, t)| (p - t) * (p - t)).sum();
        Ok((se / self.len() as f64).sqrt())
    }
}

/// Test RMSE of `model` against `truth` on `q` Latin-hypercube points.
pub fn rmse(model: &PceModel, truth: &BenchmarkModel, q: usize, seed: u64) -> Result<f64> {
    TestSet::lhs(truth, q, seed)?.rmse(model)
}
