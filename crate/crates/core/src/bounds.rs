//! Upper and lower bounds on differential entropy (rates), in nats.
//!
//! The Gaussian with matching second-order statistics bounds entropy from
//! above. A `(c1, c2)`-regular density loses at most
//! `2 c1 E[X_k²] + 2 c2(n) √E[X_k²] / √n` nats per coordinate relative to
//! that Gaussian, which gives the lower bound.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::regularity::{prop2_product_model_constants, C2Growth, RegularityConstants};
use crate::simulate::{model_covariance, model_psd, with_mean_offset, ProcessModel};
use crate::spectra::{convolve_psd, szego_entropy_rate, AutocovarianceSpec, SpectralDensity};
use crate::toeplitz::{gaussian_entropy_per_coordinate, process_regularity_c1, ToeplitzCovariance};

/// Bound decomposition for one block length (`n > 0`) or the rate (`n = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBoundReport {
    pub n: usize,
    pub upper_nats: f64,
    /// `c1` part of the divergence bound: `2 c1 E[X_k²]`.
    pub c1_term: f64,
    /// `c2` part: `2 c2(n) √E[X_k²] / √n`, or its `n → ∞` limit for rates.
    pub c2_term: f64,
    pub kl_per_n_bound: f64,
    pub lower_nats: f64,
    pub constants_used: RegularityConstants,
    pub second_moment: f64,
}

impl EntropyBoundReport {
    fn assemble(
        n: usize,
        upper_nats: f64,
        c1_term: f64,
        c2_term: f64,
        constants: RegularityConstants,
        second_moment: f64,
    ) -> Self {
        let kl = c1_term + c2_term;
        Self {
            n,
            upper_nats,
            c1_term,
            c2_term,
            kl_per_n_bound: kl,
            lower_nats: upper_nats - kl,
            constants_used: constants,
            second_moment,
        }
    }

    pub fn gap(&self) -> f64 {
        self.upper_nats - self.lower_nats
    }

    pub const CSV_HEADER: &'static str = "n,upper,kl_bound,lower,c1,c2,c2_growth,second_moment";

    /// One CSV row matching [`Self::CSV_HEADER`]; values scaled by `unit`.
    pub fn csv_row(&self, unit: f64) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.upper_nats / unit,
            self.kl_per_n_bound / unit,
            self.lower_nats / unit,
            self.constants_used.c1,
            self.constants_used.c2,
            self.constants_used.growth_label(),
            self.second_moment
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        writeln!(out, "{}", self.csv_row(1.0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What the Gaussian upper bound is computed from.
#[derive(Debug, Clone, Copy)]
pub enum GaussianSource<'a> {
    /// Entropy rate via the Szegő integral.
    Spectrum(&'a SpectralDensity),
    /// Per-coordinate entropy of one block.
    Covariance(&'a ToeplitzCovariance),
}

pub fn gaussian_upper_bound(source: GaussianSource<'_>) -> Result<f64> {
    match source {
        GaussianSource::Spectrum(s) => szego_entropy_rate(s),
        GaussianSource::Covariance(c) => gaussian_entropy_per_coordinate(c),
    }
}

fn check_moment(second_moment: f64) -> Result<()> {
    if !(second_moment >= 0.0 && second_moment.is_finite()) {
        return Err(invalid("second_moment", format!("must be finite and >= 0, got {second_moment}")));
    }
    Ok(())
}

/// `(c1 term, c2 term)` of the per-coordinate divergence bound at block
/// length `n`. A `√n` growth law cancels exactly against the `1/√n`.
fn kl_terms(constants: &RegularityConstants, second_moment: f64, n: usize) -> (f64, f64) {
    let c1_term = 2.0 * constants.c1 * second_moment;
    let c2_term = match constants.c2_growth {
        C2Growth::Constant => 2.0 * constants.c2 * second_moment.sqrt() / (n as f64).sqrt(),
        C2Growth::SqrtN { coefficient } => 2.0 * coefficient * second_moment.sqrt(),
    };
    (c1_term, c2_term)
}

/// Bound on `D(f⁽ⁿ⁾)/n` for a stationary regular process with per-coordinate
/// second moment `E[X_k²] = μ² + σ²`.
pub fn theorem1_kl_bound(constants: &RegularityConstants, second_moment: f64, n: usize) -> Result<f64> {
    check_moment(second_moment)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let (a, b) = kl_terms(constants, second_moment, n);
    Ok(a + b)
}

/// Same bound for a non-stationary sequence with second moments bounded by
/// `max_second_moment = max_k E[X_k²]`.
pub fn theorem2_kl_bound(
    constants: &RegularityConstants,
    max_second_moment: f64,
    n: usize,
) -> Result<f64> {
    theorem1_kl_bound(constants, max_second_moment, n)
}

/// [`theorem2_kl_bound`] from the individual coordinate moments.
pub fn theorem2_kl_bound_from_moments(constants: &RegularityConstants, moments: &[f64]) -> Result<f64> {
    let max = moments.iter().copied().fold(0.0, f64::max);
    theorem2_kl_bound(constants, max, moments.len())
}

/// Rate lower bound from a spectrum:
/// `(1/2)∫ln(2πe S) - 2 c1 (μ²+σ²) - lim_n 2 c2(n) √(μ²+σ²)/√n`.
/// The limit term is zero for constant `c2` and `2 · coefficient · √(μ²+σ²)`
/// for `√n` growth.
pub fn lower_bound_rate_from_spectrum(
    spectrum: &SpectralDensity,
    constants: &RegularityConstants,
    mean: f64,
    variance: f64,
) -> Result<EntropyBoundReport> {
    if !(variance > 0.0) {
        return Err(invalid("variance", format!("must be positive, got {variance}")));
    }
    let upper = szego_entropy_rate(spectrum)?;
    let m2 = mean * mean + variance;
    let c1_term = 2.0 * constants.c1 * m2;
    let c2_term = match constants.c2_growth {
        C2Growth::Constant => 0.0,
        C2Growth::SqrtN { coefficient } => 2.0 * coefficient * m2.sqrt(),
    };
    Ok(EntropyBoundReport::assemble(0, upper, c1_term, c2_term, *constants, m2))
}

pub fn lower_bound_rate(
    spec: &AutocovarianceSpec,
    constants: &RegularityConstants,
    mean: f64,
    variance: f64,
    grid_size: usize,
) -> Result<EntropyBoundReport> {
    let s = SpectralDensity::from_autocovariance(spec, grid_size)?;
    lower_bound_rate_from_spectrum(&s, constants, mean, variance)
}

/// Finite-`n` counterpart: per-coordinate Gaussian entropy of the block
/// minus the divergence bound at that `n`.
pub fn lower_bound_block(
    cov: &ToeplitzCovariance,
    constants: &RegularityConstants,
    mean: f64,
) -> Result<EntropyBoundReport> {
    let n = cov.dim();
    let upper = gaussian_entropy_per_coordinate(cov)?;
    let m2 = mean * mean + cov.entry(0, 0);
    let (a, b) = kl_terms(constants, m2, n);
    Ok(EntropyBoundReport::assemble(n, upper, a, b, *constants, m2))
}

/// Rate bounds for a process model. Gaussian models use the spectral
/// constant `c1 = 1/inf S`; product models use the noise smoothing constants
/// with their `√n` growth.
pub fn model_rate_bound(model: &ProcessModel, grid_size: usize) -> Result<EntropyBoundReport> {
    let s = model_psd(model, grid_size)?;
    let constants = match model {
        ProcessModel::Gaussian { mean, .. } => with_mean_offset(process_regularity_c1(&s)?, *mean, 1)?,
        _ => model.regularity_constants(1)?,
    };
    lower_bound_rate_from_spectrum(&s, &constants, model.mean(), model.implied_variance())
}

/// Per-coordinate bounds on `h(Yⁿ)/n` at block length `n`.
pub fn model_block_bound(model: &ProcessModel, n: usize) -> Result<EntropyBoundReport> {
    let cov = model_covariance(model, n)?;
    lower_bound_block(&cov, &model.regularity_constants(n)?, model.mean())
}

/// Closed-form rate bound for `Y = H ⊙ X + Z`:
///
/// `(1/2)∫ln(2πe((S_H ⊛ S_X)(f) + σ_Z²))df - 6(r_H(0) r_X(0)/σ_Z² + 1)
///  - (8/σ_Z²) √(r_H(0) r_X(0)) √(r_H(0) r_X(0) + σ_Z²)`.
pub fn example_model_bound(
    r_h0: f64,
    r_x0: f64,
    noise_variance: f64,
    s_h: &SpectralDensity,
    s_x: &SpectralDensity,
) -> Result<EntropyBoundReport> {
    for (name, r0, s) in [("s_h", r_h0, s_h), ("s_x", r_x0, s_x)] {
        if !(r0 > 0.0) {
            return Err(invalid(name, format!("r(0) must be positive, got {r0}")));
        }
        if (s.mean() - r0).abs() > 1e-8 * r0 {
            return Err(invalid(
                name,
                format!("spectrum power {} does not match r(0) = {r0}", s.mean()),
            ));
        }
    }
    let constants = prop2_product_model_constants(noise_variance, r_h0, r_x0, 1)?;
    let s_y = convolve_psd(s_h, s_x)?.plus_constant(noise_variance)?;
    let upper = szego_entropy_rate(&s_y)?;
    let p = r_h0 * r_x0;
    let c1_term = 6.0 * (p / noise_variance + 1.0);
    let c2_term = 8.0 / noise_variance * p.sqrt() * (p + noise_variance).sqrt();
    Ok(EntropyBoundReport::assemble(
        0,
        upper,
        c1_term,
        c2_term,
        constants,
        p + noise_variance,
    ))
}

/// `Δ = ((c1/2)√E‖U‖² + (c1/2)√E‖V‖² + c2) · W2(U, V)`, which bounds
/// `h(U) - h(V)` when `V` has a `(c1, c2)`-regular density.
pub fn prop1_delta(c1: f64, c2: f64, second_moment_u: f64, second_moment_v: f64, w2: f64) -> f64 {
    (0.5 * c1 * second_moment_u.sqrt() + 0.5 * c1 * second_moment_v.sqrt() + c2) * w2
}
