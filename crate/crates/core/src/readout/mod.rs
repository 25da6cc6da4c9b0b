//! Fluorescence readout of two ions: count distributions with depumping,
//! seeded histogram synthesis, reference calibration and maximum-likelihood
//! population fits.
//!
//! Each ion is modeled independently. A bright ion yields Poisson(λ_b)
//! counts. A dark ion yields Poisson(λ_d) unless it is pumped back to the
//! bright state during the window, in which case the mean interpolates
//! linearly between λ_d and λ_b according to the transfer time. Two-ion
//! distributions are convolutions of single-ion ones; background counts
//! are folded into λ_d.

mod fit;
mod histogram;
mod model;

pub use fit::{
    calibrate_reference, fit_populations, fit_populations_with, Calibration, ErrorMethod, FitOptions, PopulationFit,
    MAX_CALIBRATION_OVERLAP, MAX_DEPUMP_PRODUCT,
};
pub use histogram::{
    sample_histogram, synthesize_histograms, synthesize_references, synthesize_unpulsed, CalibrationSet, Histogram,
    HistogramSet,
};
pub use model::{
    gauss_legendre, ion_count_pmf, ion_count_pmf_with_len, two_ion_components, two_ion_components_with_len,
    two_ion_mixture_pmf, CountPmf, DetectionModel, GAUSS_LEGENDRE_ORDER, PLACEHOLDER_DEPUMP_PRODUCT,
    PLACEHOLDER_LAMBDA_BRIGHT, PLACEHOLDER_LAMBDA_DARK, PLACEHOLDER_T_DETECT,
};
