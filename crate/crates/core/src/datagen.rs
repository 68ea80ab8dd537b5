//! Synthetic regression data: four covariate families built on the
//! equicorrelated covariance `Σ_ij = 0.5^{I(i≠j)}`, Gaussian responses, and
//! centering.
//!
//! A dataset is a pure function of its [`DataSpec`]. Covariates, `β*` and the
//! noise come from separate ChaCha streams of the spec's seed, so changing
//! `sigma_noise` leaves `X` and `β*` untouched.

use rand_distr::ChiSquared;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::precond::LambdaRule;
use crate::sketch::Rng;
use crate::solvers;

const STREAM_COVARIATES: u64 = 0;
const STREAM_BETA: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// Default noise standard deviation (σ² = 9).
pub const DEFAULT_SIGMA: f64 = 3.0;

/// Covariate distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// `N(0, Σ)`.
    Normal,
    /// Entrywise `exp` of an `N(0, Σ)` draw.
    LogNormal,
    /// Multivariate t with 2 degrees of freedom, `N(0, Σ)/√(χ²₂/2)` per row.
    T2,
    /// Each row drawn from one of `N(1, Σ)`, `t₂(0, Σ)`, `t₃(0, Σ)`,
    /// `Unif(0, 2)^d` and `LN(0, Σ)` with probability 1/5 each.
    Mixture,
}

impl Distribution {
    pub const ALL: [Distribution; 4] = [
        Distribution::Normal,
        Distribution::LogNormal,
        Distribution::T2,
        Distribution::Mixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Normal => "normal",
            Distribution::LogNormal => "lognormal",
            Distribution::T2 => "t2",
            Distribution::Mixture => "mixture",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Some(Distribution::Normal),
            "lognormal" | "log-normal" => Some(Distribution::LogNormal),
            "t2" => Some(Distribution::T2),
            "mixture" => Some(Distribution::Mixture),
            _ => None,
        }
    }

    /// Ridge rule suited to the tail behaviour of the family.
    pub fn default_lambda_rule(self) -> LambdaRule {
        match self {
            Distribution::Normal => LambdaRule::Concentrated,
            _ => LambdaRule::HeavyTailed,
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to regenerate a dataset bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub dist: Distribution,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub sigma_noise: f64,
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

impl DataSpec {
    pub fn new(dist: Distribution, n: usize, d: usize, seed: u64) -> Self {
        Self {
            dist,
            n,
            d,
            seed,
            sigma_noise: DEFAULT_SIGMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n < self.d {
            return Err(Error::InvalidArgument(format!(
                "need n >= d >= 1, got n = {}, d = {}",
                self.n, self.d
            )));
        }
        if !(self.sigma_noise.is_finite() && self.sigma_noise >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma_noise must be finite and non-negative, got {}",
                self.sigma_noise
            )));
        }
        Ok(())
    }
}

/// A centered design with its response, true coefficients and least-squares
/// solution.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
    pub beta_ls: Vec<f64>,
}

impl Dataset {
    /// Draws covariates, `β* ~ N(0, I_d)` and noise, centers `X` and `y`,
    /// and solves the full least-squares problem once.
    pub fn generate(spec: &DataSpec) -> Result<Self> {
        let (x, y, beta_star) = generate_raw(spec, false)?;
        let (x, y) = center(&x, &y)?;
        let beta_ls = solvers::full_ls(&x, &y)?;
        Ok(Self {
            x,
            y,
            beta_star,
            beta_ls,
        })
    }
}

/// Uncentered `(X, y, β*)`. With `scale` set, the columns of `X` are
/// standardized before the response is formed.
pub fn generate_raw(spec: &DataSpec, scale: bool) -> Result<(DenseMatrix, Vec<f64>, Vec<f64>)> {
    let mut x = gen_covariates(spec)?;
    if scale {
        x = scale_columns(&x);
    }
    let beta_star = gen_beta_star(spec);
    let mut noise = Rng::derive(spec.seed, 0, STREAM_NOISE);
    let y = gen_response(&x, &beta_star, spec.sigma_noise, &mut noise)?;
    Ok((x, y, beta_star))
}

/// `Σ` with unit diagonal and 0.5 off the diagonal.
pub fn make_sigma(d: usize) -> DenseMatrix {
    let mut s = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            s.set(i, j, if i == j { 1.0 } else { 0.5 });
        }
    }
    s
}

pub fn gen_beta_star(spec: &DataSpec) -> Vec<f64> {
    let mut rng = Rng::derive(spec.seed, 0, STREAM_BETA);
    (0..spec.d).map(|_| rng.normal()).collect()
}

struct RowSampler {
    lower: DenseMatrix,
    chi2: ChiSquared<f64>,
    chi3: ChiSquared<f64>,
    z: Vec<f64>,
}

impl RowSampler {
    fn new(d: usize) -> Result<Self> {
        let lower = linalg::cholesky(&make_sigma(d))?.lower().clone();
        Ok(Self {
            lower,
            chi2: ChiSquared::new(2.0).expect("valid degrees of freedom"),
            chi3: ChiSquared::new(3.0).expect("valid degrees of freedom"),
            z: vec![0.0; d],
        })
    }

    /// One `N(0, Σ)` row, `L z`.
    fn gaussian(&mut self, rng: &mut Rng, out: &mut [f64]) {
        for z in self.z.iter_mut() {
            *z = rng.normal();
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = linalg::dot(&self.lower.row(j)[..=j], &self.z[..=j]);
        }
    }

    fn student(&mut self, rng: &mut Rng, out: &mut [f64], nu: f64) {
        self.gaussian(rng, out);
        let w = if nu == 2.0 {
            rng.sample(&self.chi2)
        } else {
            rng.sample(&self.chi3)
        };
        let s = (w / nu).sqrt();
        out.iter_mut().for_each(|v| *v /= s);
    }

    fn lognormal(&mut self, rng: &mut Rng, out: &mut [f64]) {
        self.gaussian(rng, out);
        out.iter_mut().for_each(|v| *v = v.exp());
    }

    fn mixture(&mut self, rng: &mut Rng, out: &mut [f64]) {
        match rng.below(5) {
            0 => {
                self.gaussian(rng, out);
                out.iter_mut().for_each(|v| *v += 1.0);
            }
            1 => self.student(rng, out, 2.0),
            2 => self.student(rng, out, 3.0),
            3 => out.iter_mut().for_each(|v| *v = 2.0 * rng.uniform()),
            _ => self.lognormal(rng, out),
        }
    }
}

/// Uncentered `n × d` covariate matrix for `spec`.
pub fn gen_covariates(spec: &DataSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut rng = Rng::derive(spec.seed, 0, STREAM_COVARIATES);
    let mut sampler = RowSampler::new(d)?;
    let mut x = DenseMatrix::zeros(n, d);
    for i in 0..n {
        let row = x.row_mut(i);
        match spec.dist {
            Distribution::Normal => sampler.gaussian(&mut rng, row),
            Distribution::LogNormal => sampler.lognormal(&mut rng, row),
            Distribution::T2 => sampler.student(&mut rng, row, 2.0),
            Distribution::Mixture => sampler.mixture(&mut rng, row),
        }
    }
    Ok(x)
}

/// `y = Xβ* + σ ε` with standard normal `ε`.
pub fn gen_response(x: &DenseMatrix, beta_star: &[f64], sigma: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    let mut y = x.matvec(beta_star)?;
    if sigma != 0.0 {
        for v in y.iter_mut() {
            *v += sigma * rng.normal();
        }
    }
    Ok(y)
}

/// Subtracts column means from `X` and the mean from `y`.
pub fn center(x: &DenseMatrix, y: &[f64]) -> Result<(DenseMatrix, Vec<f64>)> {
    check_len("center response", x.rows(), y.len())?;
    if x.rows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "centering needs at least 2 rows, got {}",
            x.rows()
        )));
    }
    let mut xc = x.clone();
    let means = column_means(x);
    for i in 0..xc.rows() {
        for (v, m) in xc.row_mut(i).iter_mut().zip(&means) {
            *v -= m;
        }
    }
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    Ok((xc, y.iter().map(|v| v - ym).collect()))
}

/// Divides each column by its standard deviation; constant columns are left
/// as they are.
pub fn scale_columns(x: &DenseMatrix) -> DenseMatrix {
    let n = x.rows() as f64;
    let means = column_means(x);
    let mut sd = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        for ((s, v), m) in sd.iter_mut().zip(r).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    sd.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    let mut out = x.clone();
    for i in 0..out.rows() {
        for (v, s) in out.row_mut(i).iter_mut().zip(&sd) {
            if *s > 0.0 {
                *v /= s;
            }
        }
    }
    out
}

pub fn column_means(x: &DenseMatrix) -> Vec<f64> {
    let mut means = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        linalg::axpy(1.0, r, &mut means);
    }
    let n = x.rows().max(1) as f64;
    means.iter_mut().for_each(|m| *m /= n);
    means
}
