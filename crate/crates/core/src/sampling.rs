//! Experimental designs and their CSV form.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use crate::error::{invalid, PceError, Result};
use crate::orthopoly::{Affine, PolyFamily, PolyKind};

/// Distribution of one input coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl Domain {
    pub fn kind(&self) -> PolyKind {
        match self {
            Domain::Uniform { .. } => PolyKind::Legendre,
            Domain::Gaussian { .. } => PolyKind::Hermite,
        }
    }

    /// Map from user coordinates to the family's canonical variable.
    pub fn transform(&self) -> Affine {
        match *self {
            Domain::Uniform { lo, hi } => Affine::from_interval(lo, hi),
            Domain::Gaussian { mean, std } => Affine {
                shift: mean,
                scale: std,
            },
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Domain::Uniform { lo, hi } => (lo..=hi).contains(&x),
            Domain::Gaussian { .. } => x.is_finite(),
        }
    }

    /// Interior point used for finite-difference checks and scale estimates.
    pub fn width(&self) -> f64 {
        match *self {
            Domain::Uniform { lo, hi } => hi - lo,
            Domain::Gaussian { std, .. } => std,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            Domain::Gaussian { mean, std } => write!(f, "gaussian:{mean}:{std}"),
        }
    }
}

impl FromStr for Domain {
    type Err = PceError;

    /// `uniform:lo:hi`, `gaussian:mean:std`, or bare `lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad number `{t}` in domain `{s}`")))
        };
        let dom = match parts.as_slice() {
            [lo, hi] => Domain::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            ["uniform", lo, hi] => Domain::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            ["gaussian" | "normal", mean, std] => Domain::Gaussian {
                mean: num(mean)?,
                std: num(std)?,
            },
            _ => return Err(invalid(format!("cannot parse domain `{s}`"))),
        };
        validate_domains(std::slice::from_ref(&dom))?;
        Ok(dom)
    }
}

fn validate_domains(domains: &[Domain]) -> Result<()> {
    if domains.is_empty() {
        return Err(invalid("at least one input dimension is required"));
    }
    for d in domains {
        match *d {
            Domain::Uniform { lo, hi } if !(lo < hi) => return Err(invalid(format!("empty interval [{lo}, {hi}]"))),
            Domain::Gaussian { std, .. } if !(std >= 0.0) => {
                return Err(invalid(format!("negative standard deviation {std}")))
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn family_for(domains: &[Domain]) -> PolyFamily {
    PolyFamily::new(domains.iter().map(Domain::kind).collect())
}

pub fn transforms_for(domains: &[Domain]) -> Vec<Affine> {
    domains.iter().map(Domain::transform).collect()
}

/// Samples with optional responses and gradients, all in user coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub samples: DMatrix<f64>,
    pub responses: Option<DVector<f64>>,
    pub gradients: Option<DMatrix<f64>>,
    pub domains: Vec<Domain>,
    pub seed: u64,
}

impl Design {
    pub fn new(samples: DMatrix<f64>, domains: Vec<Domain>, seed: u64) -> Result<Self> {
        validate_domains(&domains)?;
        if samples.nrows() == 0 {
            return Err(invalid("a design needs at least one sample"));
        }
        if samples.ncols() != domains.len() {
            return Err(PceError::DimensionMismatch {
                expected: domains.len(),
                actual: samples.ncols(),
            });
        }
        Ok(Self {
            samples,
            responses: None,
            gradients: None,
            domains,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn family(&self) -> PolyFamily {
        family_for(&self.domains)
    }

    pub fn transforms(&self) -> Vec<Affine> {
        transforms_for(&self.domains)
    }

    /// Samples mapped to the canonical domain.
    pub fn canonical(&self) -> DMatrix<f64> {
        crate::orthopoly::to_canonical(&self.samples, &self.transforms())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.samples.row(i).iter().copied().collect()
    }

    pub fn with_responses(mut self, f: DVector<f64>) -> Result<Self> {
        if f.len() != self.len() {
            return Err(PceError::DimensionMismatch {
                expected: self.len(),
                actual: f.len(),
            });
        }
        self.responses = Some(f);
        Ok(self)
    }

    pub fn with_gradients(mut self, g: DMatrix<f64>) -> Result<Self> {
        if g.shape() != self.samples.shape() {
            return Err(PceError::DimensionMismatch {
                expected: self.len() * self.dim(),
                actual: g.len(),
            });
        }
        self.gradients = Some(g);
        Ok(self)
    }

    pub fn responses(&self) -> Result<&DVector<f64>> {
        self.responses.as_ref().ok_or(PceError::MissingResponses)
    }

    pub fn gradients(&self) -> Result<&DMatrix<f64>> {
        self.gradients.as_ref().ok_or(PceError::MissingGradients)
    }

    /// Writes `x1..xd[,f][,g1..gd]` with one row per sample.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let d = self.dim();
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        if self.responses.is_some() {
            header.push("f".into());
        }
        if self.gradients.is_some() {
            header.extend((1..=d).map(|k| format!("g{k}")));
        }
        wr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.samples.row(i).iter().map(|v| v.to_string()).collect();
            if let Some(f) = &self.responses {
                rec.push(f[i].to_string());
            }
            if let Some(g) = &self.gradients {
                rec.extend(g.row(i).iter().map(|v| v.to_string()));
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a CSV design. Columns `x1..xd` are required (with `d` taken from
    /// `domains` when given); `f` and a complete `g1..gd` block are optional.
    /// Without `domains` every input is taken as uniform on `[-1, 1]`.
    pub fn read_csv<R: Read>(r: R, domains: Option<&[Domain]>) -> Result<Design> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let col = |name: &str| header.iter().position(|h| h == name);
        let d = match domains {
            Some(doms) => doms.len(),
            None => (1..).take_while(|k| col(&format!("x{k}")).is_some()).count(),
        };
        if d == 0 {
            return Err(PceError::MissingColumn("x1".into()));
        }
        let x_cols = (1..=d)
            .map(|k| col(&format!("x{k}")).ok_or_else(|| PceError::MissingColumn(format!("x{k}"))))
            .collect::<Result<Vec<_>>>()?;
        let f_col = col("f");
        let g_present = (1..=d).filter(|k| col(&format!("g{k}")).is_some()).count();
        let g_cols = if g_present == 0 {
            None
        } else {
            Some(
                (1..=d)
                    .map(|k| col(&format!("g{k}")).ok_or_else(|| PceError::MissingColumn(format!("g{k}"))))
                    .collect::<Result<Vec<_>>>()?,
            )
        };

        let mut xs = Vec::new();
        let mut fs = Vec::new();
        let mut gs = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let get = |c: usize| -> Result<f64> {
                let raw = rec.get(c).unwrap_or("");
                raw.parse::<f64>().map_err(|_| PceError::Parse {
                    line: line + 2,
                    message: format!("bad number `{raw}` in column `{}`", header[c]),
                })
            };
            for &c in &x_cols {
                xs.push(get(c)?);
            }
            if let Some(c) = f_col {
                fs.push(get(c)?);
            }
            if let Some(gc) = &g_cols {
                for &c in gc {
                    gs.push(get(c)?);
                }
            }
        }
        let m = xs.len() / d;
        let doms = match domains {
            Some(doms) => doms.to_vec(),
            None => vec![Domain::Uniform { lo: -1.0, hi: 1.0 }; d],
        };
        let mut design = Design::new(DMatrix::from_row_slice(m, d, &xs), doms, 0)?;
        if f_col.is_some() {
            design = design.with_responses(DVector::from_vec(fs))?;
        }
        if g_cols.is_some() {
            design = design.with_gradients(DMatrix::from_row_slice(m, d, &gs))?;
        }
        Ok(design)
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(invalid("design size M must be at least 1"))
    } else {
        Ok(())
    }
}

fn uniform_box(domains: &[Domain]) -> Result<Vec<(f64, f64)>> {
    domains
        .iter()
        .map(|d| match *d {
            Domain::Uniform { lo, hi } => Ok((lo, hi)),
            Domain::Gaussian { .. } => Err(invalid("expected a bounded (uniform) domain")),
        })
        .collect()
}

/// Draws `m` i.i.d. points from the product distribution of `domains`.
pub fn random_design(m: usize, domains: &[Domain], seed: u64) -> Result<Design> {
    check_m(m)?;
    validate_domains(domains)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = domains.len();
    let mut x = DMatrix::zeros(m, d);
    for i in 0..m {
        for (k, dom) in domains.iter().enumerate() {
            x[(i, k)] = match *dom {
                Domain::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
                Domain::Gaussian { mean, std } => {
                    let z: f64 = Normal::new(0.0, 1.0).unwrap().sample(&mut rng);
                    mean + std * z
                }
            };
        }
    }
    Design::new(x, domains.to_vec(), seed)
}

/// I.i.d. uniform points in the box `bounds`.
pub fn uniform_design(m: usize, bounds: &[(f64, f64)], seed: u64) -> Result<Design> {
    let domains: Vec<Domain> = bounds.iter().map(|&(lo, hi)| Domain::Uniform { lo, hi }).collect();
    random_design(m, &domains, seed)
}

/// I.i.d. normal points with common mean and standard deviation.
pub fn gaussian_design(m: usize, d: usize, mean: f64, std: f64, seed: u64) -> Result<Design> {
    random_design(m, &vec![Domain::Gaussian { mean, std }; d], seed)
}

/// Latin hypercube: in each dimension the `m` points occupy the `m` equal
/// probability strata exactly once, uniformly jittered inside the stratum.
/// Gaussian dimensions are stratified in probability and mapped through the
/// normal quantile function.
pub fn lhs_design_in(m: usize, domains: &[Domain], seed: u64) -> Result<Design> {
    check_m(m)?;
    validate_domains(domains)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = domains.len();
    let mut x = DMatrix::zeros(m, d);
    let mut perm: Vec<usize> = (0..m).collect();
    for (k, dom) in domains.iter().enumerate() {
        perm.shuffle(&mut rng);
        for i in 0..m {
            let u = (perm[i] as f64 + rng.random::<f64>()) / m as f64;
            x[(i, k)] = match *dom {
                Domain::Uniform { lo, hi } => (lo + (hi - lo) * u).min(hi),
                Domain::Gaussian { mean, std } => {
                    let u = u.clamp(1e-300, 1.0 - 1e-16);
                    let z = StatNormal::standard().inverse_cdf(u);
                    mean + std * z
                }
            };
        }
    }
    Design::new(x, domains.to_vec(), seed)
}

/// Latin hypercube in the box `bounds`.
pub fn lhs_design(m: usize, bounds: &[(f64, f64)], seed: u64) -> Result<Design> {
    let domains: Vec<Domain> = bounds.iter().map(|&(lo, hi)| Domain::Uniform { lo, hi }).collect();
    lhs_design_in(m, &domains, seed)
}

/// Points drawn from the Chebyshev (arcsine) measure of each interval.
pub fn chebyshev_design(m: usize, domains: &[Domain], seed: u64) -> Result<Design> {
    check_m(m)?;
    let bounds = uniform_box(domains)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(m, bounds.len());
    for i in 0..m {
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            let z = (PI * rng.random::<f64>()).cos();
            x[(i, k)] = Affine::from_interval(lo, hi).to_user(z);
        }
    }
    Design::new(x, domains.to_vec(), seed)
}

/// Preconditioning weights `(π/2)^{d/2} Π (1 − ξₙ²)^{1/4}` for canonical
/// samples in `[-1,1]^d`. Rows on the boundary get weight zero.
pub fn chebyshev_weights(canonical: &DMatrix<f64>) -> Vec<f64> {
    let d = canonical.ncols() as f64;
    let base = (PI / 2.0).powf(d / 2.0);
    canonical
        .row_iter()
        .map(|row| base * row.iter().map(|&z| (1.0 - z * z).max(0.0).powf(0.25)).product::<f64>())
        .collect()
}
