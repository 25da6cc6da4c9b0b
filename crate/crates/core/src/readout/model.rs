use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::analysis::SpinPopulations;
use crate::error::{Error, Result};

/// Quadrature order used for the depumping integral.
pub const GAUSS_LEGENDRE_ORDER: usize = 64;

/// Placeholder readout rates (not measured values): λ_b·T = 30,
/// λ_d·T = 2 and r·T = 0.04 for T = 400 µs.
pub const PLACEHOLDER_T_DETECT: f64 = 400e-6;
pub const PLACEHOLDER_LAMBDA_BRIGHT: f64 = 30.0;
pub const PLACEHOLDER_LAMBDA_DARK: f64 = 2.0;
pub const PLACEHOLDER_DEPUMP_PRODUCT: f64 = 0.04;

/// Single-ion fluorescence detection model. `rate_dark` includes half the
/// background per ion, so two-ion distributions are plain convolutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionModel {
    /// Detection window in seconds.
    pub t_detect: f64,
    /// Counts per second from one bright ion.
    pub rate_bright: f64,
    /// Counts per second attributed to one dark ion.
    pub rate_dark: f64,
    /// Dark-to-bright leakage rate during detection, 1/s.
    pub depump_rate: f64,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self::from_products(PLACEHOLDER_T_DETECT, PLACEHOLDER_LAMBDA_BRIGHT, PLACEHOLDER_LAMBDA_DARK, PLACEHOLDER_DEPUMP_PRODUCT)
    }
}

impl DetectionModel {
    /// Builds a model from expected counts λ_b, λ_d and the product r·T.
    pub fn from_products(t_detect: f64, lambda_bright: f64, lambda_dark: f64, depump_product: f64) -> Self {
        Self {
            t_detect,
            rate_bright: lambda_bright / t_detect,
            rate_dark: lambda_dark / t_detect,
            depump_rate: depump_product / t_detect,
        }
    }

    pub fn lambda_bright(&self) -> f64 {
        self.rate_bright * self.t_detect
    }

    pub fn lambda_dark(&self) -> f64 {
        self.rate_dark * self.t_detect
    }

    /// r·T, the mean number of depumping events per window.
    pub fn depump_product(&self) -> f64 {
        self.depump_rate * self.t_detect
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t_detect, self.rate_bright, self.rate_dark, self.depump_rate].iter().all(|x| x.is_finite());
        if !finite || !(self.t_detect > 0.0) {
            return Err(Error::InvalidParameter("detection window must be positive and rates finite".into()));
        }
        if self.rate_bright < 0.0 || self.rate_dark < 0.0 || self.depump_rate < 0.0 {
            return Err(Error::InvalidParameter("detection rates must be non-negative".into()));
        }
        if !(self.lambda_bright() > self.lambda_dark()) {
            return Err(Error::InvalidParameter(format!(
                "bright counts {} must exceed dark counts {}",
                self.lambda_bright(),
                self.lambda_dark()
            )));
        }
        Ok(())
    }

    /// Support length of single-ion pmfs: ⌈λ + 10√λ⌉ for the largest mean,
    /// plus a margin that keeps the tail negligible for small means.
    pub fn single_ion_support(&self) -> usize {
        let lam = self.lambda_bright().max(self.lambda_dark());
        (lam + 10.0 * lam.sqrt()).ceil() as usize + 11
    }
}

/// Probability mass function over non-negative photon counts, truncated to
/// a finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct CountPmf {
    probs: Vec<f64>,
}

impl CountPmf {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("pmf entries must be finite and non-negative".into()));
        }
        Ok(Self { probs })
    }

    /// P(k); zero outside the support.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs.iter().enumerate().map(|(k, p)| (k as f64 - m).powi(2) * p).sum()
    }

    /// Running sums P(X ≤ k).
    pub fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// Distribution of the sum of two independent counts.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.len() + other.len() - 1];
        for (i, a) in self.probs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { probs: out }
    }

    /// Bhattacharyya coefficient Σ√(p q), 1 for identical pmfs.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(p, q)| (p * q).sqrt()).sum()
    }
}

/// Nodes and weights of Gauss–Legendre quadrature on [−1, 1].
pub fn gauss_legendre() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| gauss_legendre_rule(GAUSS_LEGENDRE_ORDER))
}

fn gauss_legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * x * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (x * p1 - p2) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

/// Poisson(μ) probabilities for k = 0..len.
pub(crate) fn poisson_probs(mu: f64, len: usize, out: &mut [f64]) {
    debug_assert!(out.len() >= len);
    if mu == 0.0 {
        out[..len].fill(0.0);
        out[0] = 1.0;
        return;
    }
    if mu < 600.0 {
        let mut p = (-mu).exp();
        for (k, o) in out[..len].iter_mut().enumerate() {
            if k > 0 {
                p *= mu / k as f64;
            }
            *o = p;
        }
    } else {
        for (k, o) in out[..len].iter_mut().enumerate() {
            let kf = k as f64;
            *o = (kf * mu.ln() - mu - statrs::function::gamma::ln_gamma(kf + 1.0)).exp();
        }
    }
}

/// Single-ion count pmf on counts 0..len. A dark ion that is pumped back to
/// the bright state at time t (exponentially distributed with rate r) emits
/// Poisson(λ_d·t/T + λ_b·(T−t)/T) counts:
///
/// P_dark(k) = e^{−rT}·Pois(k; λ_d) + ∫₀^T r e^{−rt} Pois(k; λ_d t/T + λ_b (T−t)/T) dt.
pub fn ion_count_pmf_with_len(model: &DetectionModel, bright: bool, len: usize) -> Result<CountPmf> {
    model.validate()?;
    let len = len.max(1);
    let (lb, ld, rho) = (model.lambda_bright(), model.lambda_dark(), model.depump_product());
    let mut probs = vec![0.0; len];
    if bright {
        poisson_probs(lb, len, &mut probs);
        return CountPmf::from_probs(probs);
    }
    poisson_probs(ld, len, &mut probs);
    if rho > 0.0 {
        let survive = (-rho).exp();
        probs.iter_mut().for_each(|p| *p *= survive);
        let mut buf = vec![0.0; len];
        for &(x, w) in gauss_legendre() {
            // s = t/T on [0, 1]
            let s = 0.5 * (x + 1.0);
            let weight = 0.5 * w * rho * (-rho * s).exp();
            poisson_probs(ld * s + lb * (1.0 - s), len, &mut buf);
            for (p, b) in probs.iter_mut().zip(&buf) {
                *p += weight * b;
            }
        }
    }
    CountPmf::from_probs(probs)
}

/// Single-ion count pmf on the model's default support.
pub fn ion_count_pmf(model: &DetectionModel, bright: bool) -> Result<CountPmf> {
    ion_count_pmf_with_len(model, bright, model.single_ion_support())
}

/// Two-ion components (both dark, one bright, both bright), each on a
/// support of at least `min_len` counts.
pub fn two_ion_components_with_len(model: &DetectionModel, min_len: usize) -> Result<[CountPmf; 3]> {
    let single = model.single_ion_support().max(min_len.div_ceil(2) + 1);
    let b = ion_count_pmf_with_len(model, true, single)?;
    let d = ion_count_pmf_with_len(model, false, single)?;
    Ok([d.convolve(&d), b.convolve(&d), b.convolve(&b)])
}

pub fn two_ion_components(model: &DetectionModel) -> Result<[CountPmf; 3]> {
    two_ion_components_with_len(model, 0)
}

/// p_dd·(dark∗dark) + p_mixed·(bright∗dark) + p_uu·(bright∗bright), with
/// |↑⟩ detected as bright.
pub fn two_ion_mixture_pmf(model: &DetectionModel, pops: &SpinPopulations) -> Result<CountPmf> {
    pops.validate()?;
    Ok(mixture(&two_ion_components(model)?, pops))
}

pub(crate) fn mixture(components: &[CountPmf; 3], pops: &SpinPopulations) -> CountPmf {
    let weights = [pops.p_dd, pops.p_mixed, pops.p_uu];
    let len = components.iter().map(CountPmf::len).max().unwrap_or(1);
    let probs = (0..len).map(|k| components.iter().zip(&weights).map(|(c, w)| w * c.prob(k)).sum::<f64>().max(0.0)).collect();
    CountPmf { probs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rho: f64) -> DetectionModel {
        DetectionModel::from_products(400e-6, 30.0, 2.0, rho)
    }

    #[test]
    fn quadrature_integrates_polynomials_exactly() {
        let rule = gauss_legendre();
        assert_eq!(rule.len(), 64);
        assert!((rule.iter().map(|(_, w)| w).sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in [2, 10, 40, 126] {
            let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(deg)).sum();
            assert!((integral - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "degree {deg}");
        }
        // e^x over [−1, 1]
        let e: f64 = rule.iter().map(|(x, w)| w * x.exp()).sum();
        assert!((e - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn poisson_recursion_matches_closed_form() {
        let mut buf = vec![0.0; 80];
        poisson_probs(30.0, 80, &mut buf);
        let k = 25.0f64;
        let direct = (k * 30f64.ln() - 30.0 - statrs::function::gamma::ln_gamma(k + 1.0)).exp();
        assert!((buf[25] / direct - 1.0).abs() < 1e-12);
        poisson_probs(900.0, 80, &mut buf);
        assert!(buf.iter().all(|p| *p < 1e-100));
    }

    #[test]
    fn no_depumping_gives_plain_poisson() {
        let m = model(0.0);
        let d = ion_count_pmf(&m, false).unwrap();
        let mut expected = vec![0.0; d.len()];
        poisson_probs(2.0, d.len(), &mut expected);
        assert_eq!(d.as_slice(), expected.as_slice());
        let b = ion_count_pmf(&m, true).unwrap();
        assert!((b.mean() - 30.0).abs() < 1e-9);
        assert!((b.variance() - 30.0).abs() < 1e-8);
    }

    #[test]
    fn pmfs_are_normalized() {
        for rho in [0.0, 0.04, 0.4, 2.0] {
            let m = model(rho);
            for bright in [true, false] {
                let p = ion_count_pmf(&m, bright).unwrap();
                assert!((p.total() - 1.0).abs() < 1e-9, "rho {rho} bright {bright}: {}", p.total());
            }
            for c in two_ion_components(&m).unwrap() {
                assert!((c.total() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn depumping_mean_matches_closed_form() {
        // E[count] = λ_d + (λ_b − λ_d)·E[(T − t)/T; t < T] with t ~ Exp(r)
        let rho = 0.4f64;
        let d = ion_count_pmf(&model(rho), false).unwrap();
        let frac = 1.0 - (1.0 - (-rho).exp()) / rho;
        assert!((d.mean() - (2.0 + 28.0 * frac)).abs() < 1e-10);
    }

    #[test]
    fn depumping_raises_dark_counts() {
        let t = 400e-6;
        let means: Vec<f64> = [0.0, 50.0, 200.0]
            .iter()
            .map(|r| ion_count_pmf(&DetectionModel { t_detect: t, rate_bright: 30.0 / t, rate_dark: 2.0 / t, depump_rate: *r }, false).unwrap().mean())
            .collect();
        assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
        // first-order stochastic dominance: the CDF drops everywhere
        let lo = ion_count_pmf(&model(0.0), false).unwrap().cdf();
        let hi = ion_count_pmf(&model(0.08), false).unwrap().cdf();
        assert!(lo.iter().zip(&hi).all(|(a, b)| *b <= *a + 1e-15));
        assert!(lo.iter().zip(&hi).any(|(a, b)| *b < *a - 1e-6));
    }

    #[test]
    fn mixture_mean_is_linear() {
        let m = model(0.04);
        let comps = two_ion_components(&m).unwrap();
        let pops = SpinPopulations::new(0.25, 0.5, 0.25).unwrap();
        let mix = two_ion_mixture_pmf(&m, &pops).unwrap();
        let expected = 0.25 * comps[0].mean() + 0.5 * comps[1].mean() + 0.25 * comps[2].mean();
        assert!((mix.mean() - expected).abs() < 1e-10);
        assert!((mix.total() - 1.0).abs() < 1e-9);
        let all_bright = two_ion_mixture_pmf(&m, &SpinPopulations::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(all_bright.as_slice(), comps[2].as_slice());
        assert!((comps[2].mean() - 60.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut m = model(0.0);
        m.rate_bright = m.rate_dark;
        assert!(ion_count_pmf(&m, true).is_err());
        let mut m = model(0.0);
        m.t_detect = 0.0;
        assert!(m.validate().is_err());
        let mut m = model(0.0);
        m.depump_rate = -1.0;
        assert!(m.validate().is_err());
    }
}
