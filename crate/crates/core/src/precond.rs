//! The ridged A-optimal preconditioner `M(δ, λ) = (n/m) Σ δ_i x_i x_iᵀ + λ I`,
//! the rule-of-thumb ridge parameter, the Δ conditioning-improvement measure,
//! and the trace bounds that motivate largest-norm subsampling.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, CholeskyFactor, DenseMatrix};
use crate::sketch::SubsampleMask;

/// How the ridge parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaRule {
    /// `0.1 · Σ‖x_i‖²`, for light-tailed covariates.
    Concentrated,
    /// `0.4 · Σ‖x_i‖²`, for heavy-tailed covariates.
    HeavyTailed,
    /// `p · Σ‖x_i‖²` for an arbitrary proportion `p`.
    Proportion(f64),
    Explicit(f64),
}

impl LambdaRule {
    pub fn coefficient(self) -> Option<f64> {
        match self {
            LambdaRule::Concentrated => Some(0.1),
            LambdaRule::HeavyTailed => Some(0.4),
            LambdaRule::Proportion(p) => Some(p),
            LambdaRule::Explicit(_) => None,
        }
    }
}

/// Ridge parameter for `X` under `rule`.
pub fn lambda_rule(x: &DenseMatrix, rule: LambdaRule) -> f64 {
    match rule {
        LambdaRule::Explicit(v) => v,
        other => {
            let c = other.coefficient().expect("proportional rule");
            c * x.data().iter().map(|v| v * v).sum::<f64>()
        }
    }
}

/// A fixed SPD preconditioner together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    mask: Option<SubsampleMask>,
    lambda: f64,
    matrix: DenseMatrix,
    factor: CholeskyFactor,
}

impl Preconditioner {
    /// Wraps an arbitrary SPD matrix (identity, sketched Gram, ...).
    pub fn from_matrix(matrix: DenseMatrix) -> Result<Self> {
        let factor = linalg::cholesky(&matrix)?;
        Ok(Self {
            mask: None,
            lambda: 0.0,
            matrix,
            factor,
        })
    }

    pub fn mask(&self) -> Option<&SubsampleMask> {
        self.mask.as_ref()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// `M⁻¹·v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.factor.solve(v)
    }

    /// Same preconditioner scaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut p = Self::from_matrix(self.matrix.scaled(c))?;
        p.mask = self.mask.clone();
        p.lambda = self.lambda * c;
        Ok(p)
    }
}

/// Builds `M(δ, λ)`, touching only the `m` selected rows.
pub fn build_m(x: &DenseMatrix, mask: &SubsampleMask, lambda: f64) -> Result<Preconditioner> {
    check_len("build_m mask", x.rows(), mask.len())?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge parameter {lambda} must be finite and ≥ 0"
        )));
    }
    let scale = x.rows() as f64 / mask.m() as f64;
    let mut matrix = linalg::weighted_gram(x, mask.selected().iter().copied(), scale);
    matrix.add_diagonal(lambda);
    let factor = linalg::cholesky(&matrix)?;
    Ok(Preconditioner {
        mask: Some(mask.clone()),
        lambda,
        matrix,
        factor,
    })
}

/// Eigenvalues of `B = M^{-1/2} Q M^{-1/2}`, from the pencil `(Q, M)` via
/// the Cholesky factor of `M`.
pub fn preconditioned_spectrum(m: &Preconditioner, q: &DenseMatrix) -> Result<Vec<f64>> {
    linalg::pencil_eigvals(q, m.factor())
}

/// `Δ(M) = 1 − κ(M^{-1/2} Q M^{-1/2}) / κ(Q)`. At most 1; negative when `M`
/// worsens the conditioning.
pub fn delta_measure(m: &Preconditioner, q: &DenseMatrix) -> Result<f64> {
    let kappa_q = linalg::cond_spd(q)?;
    let kappa_b = linalg::cond_from_eigvals(&preconditioned_spectrum(m, q)?)?;
    Ok(1.0 - kappa_b / kappa_q)
}

/// `Σ (1 − δ_i) ‖x_i‖²`.
fn excluded_mass(x: &DenseMatrix, mask: &SubsampleMask) -> f64 {
    linalg::row_sq_norms(x)
        .iter()
        .enumerate()
        .filter(|(i, _)| !mask.contains(*i))
        .map(|(_, v)| v)
        .sum()
}

/// `(λ_min(Q), κ(Q), bracket)` where
/// `bracket = d + κ(Q)/C · Σ(1−δ_i)‖x_i‖²`.
fn trace_bound_parts(x: &DenseMatrix, mask: &SubsampleMask, c_lower: f64) -> Result<(f64, f64, f64)> {
    check_len("trace bound mask", x.rows(), mask.len())?;
    if c_lower.is_nan() || c_lower <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lower eigenvalue bound {c_lower} must be > 0"
        )));
    }
    let eig = linalg::sym_eigvals(&linalg::gram(x));
    let kappa = linalg::cond_from_eigvals(&eig)?;
    let lam_min = eig[0];
    let bracket = x.cols() as f64 + kappa / c_lower * excluded_mass(x, mask);
    Ok((lam_min, kappa, bracket))
}

/// Upper bound on `Tr[M(δ)⁻¹]` for the unscaled masked Gram
/// `M(δ) = Σ δ_i x_i x_iᵀ`:
/// `(1/λ_min(Q)) · [d + κ(Q)/C · Σ(1−δ_i)‖x_i‖²]`.
///
/// `c_lower` plays the role of `C`, a lower bound on `λ_min(M(δ))`; passing
/// `λ_min(M(δ))` itself gives the tightest valid instance.
pub fn aopt_trace_bound(x: &DenseMatrix, mask: &SubsampleMask, c_lower: f64) -> Result<f64> {
    let (lam_min, _, bracket) = trace_bound_parts(x, mask, c_lower)?;
    Ok(bracket / lam_min)
}

/// Upper bound on the Hessian-sketch covariance trace
/// `Tr[M(δ)⁻¹ XᵀX M(δ)⁻¹]`, `M(δ) = (n/m) Σ δ_i x_i x_iᵀ`:
/// `κ(Q)/λ_min(Q) · [d + κ(Q)/C · Σ(1−δ_i)‖x_i‖²]²`.
///
/// The right-hand side is the one derived for the unscaled Gram; since
/// `n/m ≥ 1` the scaled `M(δ)` only shrinks the left-hand side.
pub fn hs_cov_trace_bound(x: &DenseMatrix, mask: &SubsampleMask, c_lower: f64) -> Result<f64> {
    let (lam_min, kappa, bracket) = trace_bound_parts(x, mask, c_lower)?;
    Ok(kappa / lam_min * bracket * bracket)
}

/// `Σ δ_i x_i x_iᵀ` without the `n/m` factor.
pub fn masked_gram(x: &DenseMatrix, mask: &SubsampleMask) -> Result<DenseMatrix> {
    check_len("masked_gram mask", x.rows(), mask.len())?;
    Ok(linalg::weighted_gram(x, mask.selected().iter().copied(), 1.0))
}
