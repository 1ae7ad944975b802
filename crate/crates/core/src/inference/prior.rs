use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Hyper-parameters. Edge weights are `Gamma(shape = a_w / d_geo, rate = b_w)`,
/// with `d_geo = 1` when no geographic distances are given. Variances
/// (`σ²`, `ψ`, `σ²₀`, `σ²_β`) are inverse-gamma with shape `a` and scale `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub a_sigma2: f64,
    pub b_sigma2: f64,
    pub a_w: f64,
    pub b_w: f64,
    pub geo_dist: Option<Vec<f64>>,
    pub a_psi: f64,
    pub b_psi: f64,
    pub a_0: f64,
    pub b_0: f64,
    pub a_beta: f64,
    pub b_beta: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            a_sigma2: 2.0,
            b_sigma2: 1.0,
            a_w: 2.0,
            b_w: 1.0,
            geo_dist: None,
            a_psi: 2.0,
            b_psi: 1.0,
            a_0: 2.0,
            b_0: 1.0,
            a_beta: 2.0,
            b_beta: 1.0,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let pairs = [
            ("a_sigma2", self.a_sigma2),
            ("b_sigma2", self.b_sigma2),
            ("a_w", self.a_w),
            ("b_w", self.b_w),
            ("a_psi", self.a_psi),
            ("b_psi", self.b_psi),
            ("a_0", self.a_0),
            ("b_0", self.b_0),
            ("a_beta", self.a_beta),
            ("b_beta", self.b_beta),
        ];
        for (name, v) in pairs {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("prior {name} must be positive, got {v}")));
            }
        }
        if let Some(geo) = &self.geo_dist {
            if geo.len() != graph.edge_count() {
                return Err(Error::DimensionMismatch(format!(
                    "{} geographic distances for {} edges",
                    geo.len(),
                    graph.edge_count()
                )));
            }
            if let Some(v) = geo.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig(format!("geographic distance must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Gamma shape for edge `e`.
    pub fn weight_shape(&self, e: usize) -> f64 {
        match &self.geo_dist {
            Some(geo) => self.a_w / geo[e],
            None => self.a_w,
        }
    }

    pub fn log_prior_weight(&self, e: usize, w: f64) -> f64 {
        gamma_logpdf(w, self.weight_shape(e), self.b_w)
    }
}

/// Gamma log density with shape `a` and rate `b`.
pub fn gamma_logpdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    a * b.ln() - ln_gamma(a) + (a - 1.0) * x.ln() - b * x
}

/// Inverse-gamma log density with shape `a` and scale `b`.
pub fn inv_gamma_logpdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    a * b.ln() - ln_gamma(a) - (a + 1.0) * x.ln() - b / x
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, Gamma, InverseGamma};

    #[test]
    fn densities_match_statrs() {
        let g = Gamma::new(2.5, 1.7).unwrap();
        let ig = InverseGamma::new(3.0, 2.0).unwrap();
        for x in [0.1, 0.9, 2.3, 7.0] {
            assert!((gamma_logpdf(x, 2.5, 1.7) - g.ln_pdf(x)).abs() < 1e-12);
            assert!((inv_gamma_logpdf(x, 3.0, 2.0) - ig.ln_pdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn geographic_shape() {
        let g = Graph::path(3).unwrap();
        let prior = PriorSpec { geo_dist: Some(vec![2.0, 0.5]), ..PriorSpec::default() };
        prior.validate(&g).unwrap();
        assert_eq!(prior.weight_shape(0), 1.0);
        assert_eq!(prior.weight_shape(1), 4.0);
        let bad = PriorSpec { geo_dist: Some(vec![1.0]), ..PriorSpec::default() };
        assert!(bad.validate(&g).is_err());
    }
}
