use super::state::{Chain, ParamSelector};
use crate::error::{Error, Result};

pub const MIN_ESS_DRAWS: usize = 100;

/// Effective sample size by Geyer's initial monotone positive sequence.
pub fn effective_sample_size(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < MIN_ESS_DRAWS {
        return Err(Error::ChainTooShort { len: n, min: MIN_ESS_DRAWS });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let autocov = |lag: usize| centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let gamma0 = autocov(0);
    if !(gamma0 > f64::EPSILON * f64::EPSILON * (mean * mean).max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateVariance("chain has zero variance".into()));
    }
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = (autocov(2 * m) + autocov(2 * m + 1)) / gamma0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        m += 1;
    }
    let cap = n as f64 * (n as f64).log10();
    Ok((n as f64 / tau).min(cap))
}

pub fn chain_ess(chain: &Chain, sel: ParamSelector) -> Result<f64> {
    effective_sample_size(&chain.trace(sel))
}

/// One-sample Kolmogorov-Smirnov test; returns `(D, p-value)` with the
/// asymptotic distribution and Stephens' small-sample correction.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_survival(lambda))
}

fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
