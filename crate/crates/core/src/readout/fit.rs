use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::histogram::{sample_histogram, CalibrationSet, Histogram};
use super::model::{ion_count_pmf_with_len, two_ion_components_with_len, CountPmf, DetectionModel};
use crate::analysis::SpinPopulations;
use crate::error::{Error, Result};
use crate::noise::{channel_rng, CHANNEL_FIT};

/// Bhattacharyya overlap of the single-ion bright and dark pmfs above which
/// the references cannot separate the two states.
pub const MAX_CALIBRATION_OVERLAP: f64 = 0.5;

/// Upper limit of the fitted r·T.
pub const MAX_DEPUMP_PRODUCT: f64 = 5.0;

/// Reciprocal condition number below which the observed information is
/// treated as singular.
const SINGULAR_RCOND: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    pub seed: u64,
    /// Independent starting points of the likelihood maximization.
    pub starts: usize,
    /// Resamples for the bootstrap error fallback.
    pub bootstrap_resamples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { seed: 0, starts: 5, bootstrap_resamples: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMethod {
    ObservedFisher,
    Bootstrap,
}

/// Maximum-likelihood mixture weights of one histogram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationFit {
    pub populations: SpinPopulations,
    pub std_errors: SpinPopulations,
    /// Covariance of (p_uu, p_mixed, p_dd).
    pub covariance: [[f64; 3]; 3],
    pub log_likelihood: f64,
    pub shots: u64,
    pub error_method: ErrorMethod,
    /// Set when the likelihood does not pin the weights down.
    pub low_confidence: bool,
}

impl PopulationFit {
    /// Π = 1 − 2·p_mixed and its standard error.
    pub fn parity(&self) -> (f64, f64) {
        (self.populations.parity(), 2.0 * self.std_errors.p_mixed)
    }

    /// P↑↑ + P↓↓ = 1 − p_mixed and its standard error.
    pub fn even(&self) -> (f64, f64) {
        (self.populations.even(), self.std_errors.p_mixed)
    }
}

struct Mixture {
    /// Distinct observed counts with their occurrences.
    data: Vec<(usize, f64)>,
    /// Component probabilities at each observed count, order (dd, mixed, uu).
    comp: Vec<[f64; 3]>,
}

impl Mixture {
    fn new(hist: &Histogram, components: &[CountPmf; 3]) -> Self {
        let data: Vec<(usize, f64)> = hist.nonzero().map(|(k, n)| (k, n as f64)).collect();
        let comp = data.iter().map(|&(k, _)| [components[0].prob(k), components[1].prob(k), components[2].prob(k)]).collect();
        Self { data, comp }
    }

    fn log_likelihood(&self, w: &[f64; 3]) -> f64 {
        self.data
            .iter()
            .zip(&self.comp)
            .map(|(&(_, n), c)| n * (w[0] * c[0] + w[1] * c[1] + w[2] * c[2]).max(f64::MIN_POSITIVE).ln())
            .sum()
    }

    /// Expectation–maximization on the mixture weights. Every iterate stays
    /// on the simplex and the log-likelihood, concave in the weights, never
    /// decreases.
    fn em(&self, mut w: [f64; 3]) -> [f64; 3] {
        for _ in 0..20_000 {
            let mut next = [0.0; 3];
            for (&(_, n), c) in self.data.iter().zip(&self.comp) {
                let m = w[0] * c[0] + w[1] * c[1] + w[2] * c[2];
                if m <= 0.0 {
                    continue;
                }
                for j in 0..3 {
                    next[j] += n * w[j] * c[j] / m;
                }
            }
            let s: f64 = next.iter().sum();
            if !(s > 0.0) {
                return w;
            }
            next.iter_mut().for_each(|x| *x /= s);
            let change = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            w = next;
            if change < 1e-14 {
                break;
            }
        }
        w
    }

    /// Observed information in the free coordinates (w_mixed, w_uu), with
    /// w_dd = 1 − w_mixed − w_uu.
    fn information(&self, w: &[f64; 3]) -> Matrix2<f64> {
        let mut info = Matrix2::zeros();
        for (&(_, n), c) in self.data.iter().zip(&self.comp) {
            let m = w[0] * c[0] + w[1] * c[1] + w[2] * c[2];
            if m <= 0.0 {
                continue;
            }
            let g = Vector2::new(c[1] - c[0], c[2] - c[0]);
            info += g * g.transpose() * (n / (m * m));
        }
        info
    }
}

fn to_populations(w: &[f64; 3]) -> SpinPopulations {
    SpinPopulations { p_uu: w[2], p_mixed: w[1], p_dd: w[0] }
}

fn covariance_from_free(cov2: &Matrix2<f64>) -> Matrix3<f64> {
    // (uu, mixed, dd) = J·(mixed, uu) + const
    let j = nalgebra::Matrix3x2::new(0.0, 1.0, 1.0, 0.0, -1.0, -1.0);
    j * cov2 * j.transpose()
}

/// Fits P↑↑, P↑↓+↓↑ and P↓↓ to a two-ion count histogram by maximizing the
/// multinomial likelihood of the three-component mixture.
pub fn fit_populations(hist: &Histogram, model: &DetectionModel) -> Result<PopulationFit> {
    fit_populations_with(hist, model, &FitOptions::default())
}

pub fn fit_populations_with(hist: &Histogram, model: &DetectionModel, opts: &FitOptions) -> Result<PopulationFit> {
    if hist.is_empty() {
        return Err(Error::Fit("histogram is empty".into()));
    }
    let needed = hist.max_count().unwrap_or(0) + 1;
    let comps = two_ion_components_with_len(model, needed)?;
    let mix = Mixture::new(hist, &comps);

    let mut rng = channel_rng(opts.seed, CHANNEL_FIT, 0);
    let dirichlet = Gamma::new(1.0, 1.0).expect("unit gamma");
    let mut best: Option<([f64; 3], f64)> = None;
    for s in 0..opts.starts.max(1) {
        let start = if s == 0 {
            [1.0 / 3.0; 3]
        } else {
            let g = [dirichlet.sample(&mut rng), dirichlet.sample(&mut rng), dirichlet.sample(&mut rng)];
            let t: f64 = g.iter().sum();
            [g[0] / t, g[1] / t, g[2] / t]
        };
        let w = mix.em(start);
        let ll = mix.log_likelihood(&w);
        if best.is_none_or(|(_, b)| ll > b) {
            best = Some((w, ll));
        }
    }
    let (w, ll) = best.expect("at least one start");

    let info = mix.information(&w);
    let eig = info.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let singular = !(hi > 0.0) || !(lo > SINGULAR_RCOND * hi) || !lo.is_finite();
    let (cov, method) = match (singular, info.try_inverse()) {
        (false, Some(inv)) => (covariance_from_free(&inv), ErrorMethod::ObservedFisher),
        _ => (bootstrap_covariance(hist, &comps, &w, opts.bootstrap_resamples, &mut rng), ErrorMethod::Bootstrap),
    };
    let se = |i: usize| cov[(i, i)].max(0.0).sqrt();
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cov[(i, j)];
        }
    }
    Ok(PopulationFit {
        populations: to_populations(&w),
        std_errors: SpinPopulations { p_uu: se(0), p_mixed: se(1), p_dd: se(2) },
        covariance,
        log_likelihood: ll,
        shots: hist.shots(),
        error_method: method,
        low_confidence: singular,
    })
}

fn bootstrap_covariance<R: Rng>(
    hist: &Histogram,
    comps: &[CountPmf; 3],
    w: &[f64; 3],
    resamples: usize,
    rng: &mut R,
) -> Matrix3<f64> {
    let shots = hist.shots();
    let empirical =
        CountPmf::from_probs(hist.occurrences.iter().map(|&n| n as f64 / shots as f64).collect()).expect("valid histogram");
    let fits: Vec<[f64; 3]> = (0..resamples.max(2))
        .map(|_| {
            let resample = sample_histogram(&empirical, shots, rng);
            let f = Mixture::new(&resample, comps).em(*w);
            [f[2], f[1], f[0]]
        })
        .collect();
    let n = fits.len() as f64;
    let mean: [f64; 3] = std::array::from_fn(|i| fits.iter().map(|f| f[i]).sum::<f64>() / n);
    Matrix3::from_fn(|i, j| fits.iter().map(|f| (f[i] - mean[i]) * (f[j] - mean[j])).sum::<f64>() / (n - 1.0))
}

/// Detection model recovered from calibration references, with standard
/// errors of the expected counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: DetectionModel,
    pub lambda_bright: f64,
    pub lambda_bright_std_error: f64,
    pub lambda_dark: f64,
    pub lambda_dark_std_error: f64,
    /// r·T and its standard error.
    pub depump_product: f64,
    pub depump_product_std_error: f64,
    /// Bhattacharyya overlap of the fitted single-ion pmfs.
    pub overlap: f64,
}

/// Dark-reference log-likelihood of (λ_d, r·T) with λ_b fixed.
fn dark_log_likelihood(dark: &Histogram, t_detect: f64, lambda_bright: f64, lambda_dark: f64, rho: f64) -> f64 {
    let m = DetectionModel::from_products(t_detect, lambda_bright, lambda_dark, rho);
    let len = m.single_ion_support().max(dark.max_count().unwrap_or(0) / 2 + 2);
    let Ok(single) = ion_count_pmf_with_len(&m, false, len) else {
        return f64::NEG_INFINITY;
    };
    let pair = single.convolve(&single);
    dark.nonzero().map(|(k, n)| n as f64 * pair.prob(k).max(f64::MIN_POSITIVE).ln()).sum()
}

/// Golden-section maximization of a unimodal function on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the bracket endpoints catch optima sitting on the boundary
    [(a, f(a)), (c, fc), (d, fd), (b, f(b))].into_iter().fold((a, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Calibrates the detection model from two-ion references with both ions
/// bright and both ions dark. λ_b is half the bright sample mean (the exact
/// Poisson ML estimate); λ_d and r·T maximize the dark-reference likelihood.
pub fn calibrate_reference(refs: &CalibrationSet, t_detect: f64) -> Result<Calibration> {
    if !(t_detect > 0.0) {
        return Err(Error::InvalidParameter("detection time must be positive".into()));
    }
    if refs.bright.is_empty() || refs.dark.is_empty() {
        return Err(Error::Calibration("both reference histograms must be non-empty".into()));
    }
    let (mb, md) = (refs.bright.mean(), refs.dark.mean());
    if !(mb > md) {
        return Err(Error::Calibration(format!(
            "bright reference mean {mb:.4} does not exceed dark reference mean {md:.4}; references swapped or unresolved"
        )));
    }
    let lb = 0.5 * mb;
    let nb = refs.bright.shots() as f64;
    let lb_se = (lb / (2.0 * nb)).sqrt();

    let dark = &refs.dark;
    let ll = |ld: f64, rho: f64| dark_log_likelihood(dark, t_detect, lb, ld, rho);
    let ld_hi = lb * (1.0 - 1e-9);
    let profile = |rho: f64| golden_max(|ld| ll(ld, rho), 0.0, ld_hi, 60);
    let (rho, _) = golden_max(|rho| profile(rho).1, 0.0, MAX_DEPUMP_PRODUCT, 60);
    let (ld, _) = profile(rho);
    if !(lb > ld) {
        return Err(Error::Calibration(format!("fitted dark counts {ld:.4} reach bright counts {lb:.4}")));
    }

    // observed information from a finite-difference Hessian; stencils shift
    // inward at the lower boundaries
    let hl = 1e-3 * ld.max(0.05);
    let hr = 1e-3;
    let l0 = ld.max(hl);
    let r0 = rho.max(hr);
    let f = |a: f64, b: f64| ll(l0 + a * hl, r0 + b * hr);
    let f00 = f(0.0, 0.0);
    let dll = (f(1.0, 0.0) - 2.0 * f00 + f(-1.0, 0.0)) / (hl * hl);
    let drr = (f(0.0, 1.0) - 2.0 * f00 + f(0.0, -1.0)) / (hr * hr);
    let dlr = (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * hl * hr);
    let info = Matrix2::new(-dll, -dlr, -dlr, -drr);
    let cov = info.try_inverse().ok_or_else(|| Error::Calibration("dark reference does not constrain the model".into()))?;

    let model = DetectionModel::from_products(t_detect, lb, ld, rho);
    let len = model.single_ion_support();
    let overlap = ion_count_pmf_with_len(&model, true, len)?.overlap(&ion_count_pmf_with_len(&model, false, len)?);
    if overlap > MAX_CALIBRATION_OVERLAP {
        return Err(Error::Calibration(format!(
            "bright and dark distributions overlap too much ({overlap:.3} > {MAX_CALIBRATION_OVERLAP})"
        )));
    }
    Ok(Calibration {
        model,
        lambda_bright: lb,
        lambda_bright_std_error: lb_se,
        lambda_dark: ld,
        lambda_dark_std_error: cov[(0, 0)].max(0.0).sqrt(),
        depump_product: rho,
        depump_product_std_error: cov[(1, 1)].max(0.0).sqrt(),
        overlap,
    })
}
