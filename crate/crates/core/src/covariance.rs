//! Matérn correlation, covariance assembly from edge weights through the
//! quasi-Euclidean metric, and the range rescaling `D^s = D / max(D)`,
//! `τ^s = 1 / max(D)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::EdgeWeights;
use crate::linalg::{cholesky, symmetrize_mut, Matrix};
use crate::metrics::{quasi_euclidean, DistanceMatrix, MetricTag};
use crate::special::bessel_k;

/// Default smoothness.
pub const DEFAULT_NU: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternSpec {
    pub nu: f64,
    pub variance: f64,
}

impl MaternSpec {
    pub fn new(nu: f64, variance: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("Matérn smoothness must be positive, got {nu}")));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::Domain(format!("variance must be positive, got {variance}")));
        }
        Ok(Self { nu, variance })
    }
}

impl Default for MaternSpec {
    fn default() -> Self {
        Self { nu: DEFAULT_NU, variance: 1.0 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Form {
    /// `ν = n + ½`: polynomial times exponential.
    HalfInteger { coeffs: [f64; 8], degree: usize },
    General { log_norm: f64 },
}

/// Matérn correlation `ρ_ν(d) = 2^{1−ν}/Γ(ν) (√(2ν) d)^ν K_ν(√(2ν) d)` with
/// constants precomputed for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Matern {
    nu: f64,
    scale: f64,
    form: Form,
}

impl Matern {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("Matérn smoothness must be positive, got {nu}")));
        }
        let twice = 2.0 * nu;
        let form = if (twice - twice.round()).abs() < 1e-12 && twice.round() as i64 % 2 == 1 && nu < 7.0 {
            // ρ = e^{−x} Σ_k n!(n+k)! / ((2n)! k! (n−k)!) (2x)^{n−k}
            let n = (nu - 0.5).round() as usize;
            let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
            let mut coeffs = [0.0; 8];
            for k in 0..=n {
                let c = fact(n) * fact(n + k) / (fact(2 * n) * fact(k) * fact(n - k)) * 2f64.powi((n - k) as i32);
                coeffs[n - k] = c;
            }
            Form::HalfInteger { coeffs, degree: n }
        } else {
            Form::General { log_norm: (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) }
        };
        Ok(Self { nu, scale: twice.sqrt(), form })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Correlation at distance `d ≥ 0`; exactly 1 at `d = 0`.
    pub fn rho(&self, d: f64) -> f64 {
        if d == 0.0 {
            return 1.0;
        }
        let x = self.scale * d;
        match self.form {
            Form::HalfInteger { coeffs, degree } => {
                let mut poly = 0.0;
                for &c in coeffs[..=degree].iter().rev() {
                    poly = poly * x + c;
                }
                poly * (-x).exp()
            }
            Form::General { log_norm } => {
                let k = bessel_k(self.nu, x);
                if k == 0.0 {
                    return 0.0;
                }
                (log_norm + self.nu * x.ln() + k.ln()).exp().min(1.0)
            }
        }
    }

    /// Correlation through the Bessel-function route regardless of `ν`.
    pub fn rho_general(&self, d: f64) -> f64 {
        if d == 0.0 {
            return 1.0;
        }
        let x = self.scale * d;
        let log_norm = (1.0 - self.nu) * std::f64::consts::LN_2 - ln_gamma(self.nu);
        (log_norm + self.nu * x.ln() + bessel_k(self.nu, x).ln()).exp()
    }

    /// Element-wise image of a distance matrix.
    pub fn apply(&self, d: &Matrix) -> Matrix {
        let mut out = d.map(|v| self.rho(v));
        symmetrize_mut(&mut out);
        out
    }
}

/// `ρ_ν(d)`.
pub fn matern_rho(d: f64, nu: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("distance must be nonnegative, got {d}")));
    }
    Ok(Matern::new(nu)?.rho(d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub metric: Option<MetricTag>,
    pub nu: Option<f64>,
    pub sigma2: f64,
    pub nugget: f64,
    pub correlation_scaled: bool,
}

/// Symmetric positive-definite covariance matrix, Cholesky-verified.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    sigma: Matrix,
    provenance: Provenance,
}

impl CovarianceMatrix {
    pub fn new(mut sigma: Matrix, provenance: Provenance) -> Result<Self> {
        let p = sigma.nrows();
        if sigma.ncols() != p {
            return Err(Error::DimensionMismatch("covariance must be square".into()));
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-10 * (sigma[(i, i)] + sigma[(j, j)]).abs().max(1.0) {
                    return Err(Error::Domain(format!("covariance asymmetric at ({i}, {j})")));
                }
            }
        }
        symmetrize_mut(&mut sigma);
        cholesky(&sigma)?;
        Ok(Self { sigma, provenance })
    }

    /// Wrap an externally supplied matrix.
    pub fn external(sigma: Matrix) -> Result<Self> {
        Self::new(
            sigma,
            Provenance {
                model: "external".into(),
                metric: None,
                nu: None,
                sigma2: f64::NAN,
                nugget: 0.0,
                correlation_scaled: false,
            },
        )
    }

    pub fn matrix(&self) -> &Matrix {
        &self.sigma
    }

    pub fn into_matrix(self) -> Matrix {
        self.sigma
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn size(&self) -> usize {
        self.sigma.nrows()
    }
}

/// `ρ_ν(Δ^(2)(W))`, the unit-variance correlation implied by `W`.
pub fn quasi_euclidean_correlation(w: &EdgeWeights, matern: &Matern) -> Result<Matrix> {
    let d = quasi_euclidean(w)?;
    Ok(matern.apply(d.matrix()))
}

/// `Σ = σ² ρ_ν(Δ^(2)(W)) + ψ I`.
pub fn build_sigma(w: &EdgeWeights, spec: &MaternSpec, nugget: f64) -> Result<CovarianceMatrix> {
    if !(nugget >= 0.0 && nugget.is_finite()) {
        return Err(Error::Domain(format!("nugget must be nonnegative, got {nugget}")));
    }
    let spec = MaternSpec::new(spec.nu, spec.variance)?;
    let r = quasi_euclidean_correlation(w, &Matern::new(spec.nu)?)?;
    let mut sigma = r * spec.variance;
    for i in 0..sigma.nrows() {
        sigma[(i, i)] += nugget;
    }
    CovarianceMatrix::new(
        sigma,
        Provenance {
            model: "quasi-euclidean-matern".into(),
            metric: Some(MetricTag::quasi_euclidean()),
            nu: Some(spec.nu),
            sigma2: spec.variance,
            nugget,
            correlation_scaled: false,
        },
    )
}

#[derive(Debug, Clone)]
pub struct RescaledRange {
    pub d_scaled: DistanceMatrix,
    pub tau_s: f64,
}

impl RescaledRange {
    /// `D^s / τ^s`, which reproduces the original distances.
    pub fn restored(&self) -> Matrix {
        self.d_scaled.matrix() / self.tau_s
    }
}

pub fn rescale_range(d: &DistanceMatrix) -> Result<RescaledRange> {
    let max = d.max_entry();
    if !(max > 0.0) {
        return Err(Error::DegenerateDistance);
    }
    // x / x == 1 exactly in IEEE arithmetic, so the maximum maps to 1
    let scaled = d.matrix() / max;
    Ok(RescaledRange { d_scaled: DistanceMatrix::new(scaled, d.tag())?, tau_s: 1.0 / max })
}

/// `diag(Σ)^{-1/2} Σ diag(Σ)^{-1/2}`.
pub fn to_correlation(sigma: &CovarianceMatrix) -> CovarianceMatrix {
    let m = correlation_of(sigma.matrix());
    let mut provenance = sigma.provenance.clone();
    provenance.correlation_scaled = true;
    CovarianceMatrix { sigma: m, provenance }
}

pub(crate) fn correlation_of(s: &Matrix) -> Matrix {
    let p = s.nrows();
    let inv_sd: Vec<f64> = (0..p).map(|i| 1.0 / s[(i, i)].sqrt()).collect();
    let mut m = Matrix::from_fn(p, p, |i, j| s[(i, j)] * inv_sd[i] * inv_sd[j]);
    for i in 0..p {
        m[(i, i)] = 1.0;
    }
    symmetrize_mut(&mut m);
    m
}
