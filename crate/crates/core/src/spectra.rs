//! Autocovariance functions, power spectral densities and the Szegő
//! log-integral.
//!
//! Frequencies live on the uniform grid `f_i = -1/2 + i/M`, `i = 0..M`, with
//! `M` even. The density at `f` is the cosine series
//! `S(f) = r(0) + 2 Σ_{m≥1} r(m) cos(2π m f)`. All entropies are in nats.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{pairwise_sum, LN_2PI_E};

/// Default number of frequency bins.
pub const DEFAULT_GRID_SIZE: usize = 4096;
/// Relative tail mass a lag cutoff must achieve for parametric kinds.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Upper limit on automatically chosen lag cutoffs.
pub const MAX_LAG_CUTOFF: usize = 100_000;

/// Autocovariance `r(l)` of a zero-mean stationary scalar process.
///
/// Serialized as `{kind, parameters}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum AutocovarianceSpec {
    /// `r(0) = variance`, zero elsewhere.
    White { variance: f64 },
    /// `r(l) = variance · coefficient^|l|`.
    Ar1 { variance: f64, coefficient: f64 },
    /// Moving average `X_t = Σ_k b_k W_{t-k}` with innovation variance `σ²`:
    /// `r(l) = σ² Σ_k b_k b_{k+|l|}`.
    Ma {
        coefficients: Vec<f64>,
        innovation_variance: f64,
    },
    /// `r(l) = values[|l|]` for `|l| < values.len()`, zero beyond.
    Tabulated { values: Vec<f64> },
}

impl AutocovarianceSpec {
    pub fn white(variance: f64) -> Result<Self> {
        let spec = Self::White { variance };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ar1(variance: f64, coefficient: f64) -> Result<Self> {
        let spec = Self::Ar1 {
            variance,
            coefficient,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ma(coefficients: Vec<f64>, innovation_variance: f64) -> Result<Self> {
        let spec = Self::Ma {
            coefficients,
            innovation_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        let spec = Self::Tabulated { values };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks parameter ranges. Deserialized specs should be validated
    /// before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::White { variance } => {
                if !(variance.is_finite() && *variance >= 0.0) {
                    return Err(invalid("variance", format!("must be finite and >= 0, got {variance}")));
                }
            }
            Self::Ar1 {
                variance,
                coefficient,
            } => {
                if !(variance.is_finite() && *variance >= 0.0) {
                    return Err(invalid("variance", format!("must be finite and >= 0, got {variance}")));
                }
                if !(coefficient.abs() < 1.0) {
                    return Err(invalid("coefficient", format!("|a| must be < 1, got {coefficient}")));
                }
            }
            Self::Ma {
                coefficients,
                innovation_variance,
            } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("coefficients", "must be a non-empty list of finite values"));
                }
                if !(innovation_variance.is_finite() && *innovation_variance >= 0.0) {
                    return Err(invalid(
                        "innovation_variance",
                        format!("must be finite and >= 0, got {innovation_variance}"),
                    ));
                }
            }
            Self::Tabulated { values } => {
                if values.is_empty() {
                    return Err(Error::NonSummable("empty table".into()));
                }
                let total: f64 = values.iter().map(|v| v.abs()).sum();
                if !total.is_finite() {
                    return Err(Error::NonSummable(format!(
                        "sum of |r(l)| is not finite ({total})"
                    )));
                }
                let r0 = values[0];
                if r0 < 0.0 {
                    return Err(Error::NonSummable(format!("r(0) = {r0} is negative")));
                }
                if let Some((lag, v)) = values.iter().enumerate().find(|(_, v)| v.abs() > r0) {
                    return Err(Error::NonSummable(format!(
                        "|r({lag})| = {} exceeds r(0) = {r0}",
                        v.abs()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `r(lag)`, evenly extended to negative lags.
    pub fn lag(&self, lag: i64) -> f64 {
        let l = lag.unsigned_abs() as usize;
        match self {
            Self::White { variance } => {
                if l == 0 {
                    *variance
                } else {
                    0.0
                }
            }
            Self::Ar1 {
                variance,
                coefficient,
            } => variance * coefficient.powi(l as i32),
            Self::Ma {
                coefficients,
                innovation_variance,
            } => {
                if l >= coefficients.len() {
                    return 0.0;
                }
                let s: f64 = coefficients
                    .iter()
                    .zip(&coefficients[l..])
                    .map(|(a, b)| a * b)
                    .sum();
                innovation_variance * s
            }
            Self::Tabulated { values } => values.get(l).copied().unwrap_or(0.0),
        }
    }

    pub fn variance(&self) -> f64 {
        self.lag(0)
    }

    /// Short human label, e.g. `ar1(1,0.5)`.
    pub fn label(&self) -> String {
        match self {
            Self::White { variance } => format!("white({variance})"),
            Self::Ar1 { variance, coefficient } => format!("ar1({variance},{coefficient})"),
            Self::Ma {
                coefficients,
                innovation_variance,
            } => format!("ma({coefficients:?},{innovation_variance})"),
            Self::Tabulated { values } => format!("tabulated(len={})", values.len()),
        }
    }

    /// Sum of `|r(m)|` over `|m| > lag_cutoff`.
    pub fn tail_mass(&self, lag_cutoff: usize) -> f64 {
        match self {
            Self::Ar1 {
                variance,
                coefficient,
            } => {
                let a = coefficient.abs();
                2.0 * variance * a.powi(lag_cutoff as i32 + 1) / (1.0 - a)
            }
            Self::White { .. } => 0.0,
            Self::Ma { coefficients, .. } => {
                let q = coefficients.len() - 1;
                2.0 * ((lag_cutoff + 1)..=q.max(lag_cutoff))
                    .map(|m| self.lag(m as i64).abs())
                    .sum::<f64>()
            }
            Self::Tabulated { values } => {
                2.0 * values
                    .iter()
                    .skip(lag_cutoff + 1)
                    .map(|v| v.abs())
                    .sum::<f64>()
            }
        }
    }

    /// Smallest cutoff whose tail mass is below `1e-10 · r(0)`, capped at
    /// [`MAX_LAG_CUTOFF`]. Tabulated kinds use every stored lag.
    pub fn default_lag_cutoff(&self) -> usize {
        match self {
            Self::White { .. } => 0,
            Self::Ma { coefficients, .. } => coefficients.len() - 1,
            Self::Tabulated { values } => values.len() - 1,
            Self::Ar1 { .. } => {
                let r0 = self.variance();
                (0..MAX_LAG_CUTOFF)
                    .find(|&l| self.tail_mass(l) < TAIL_TOLERANCE * r0)
                    .unwrap_or(MAX_LAG_CUTOFF)
            }
        }
    }
}

/// Power spectral density sampled at `f_i = -1/2 + i/M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    values: Vec<f64>,
    /// Number of bins clamped from a small negative value to zero.
    clamped: usize,
}

impl SpectralDensity {
    /// Wraps precomputed bin values. `values.len()` must be even and positive
    /// and every value nonnegative.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(invalid("grid_size", format!("must be positive and even, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid("values", format!("density values must be finite and >= 0, got {v}")));
        }
        Ok(Self { values, clamped: 0 })
    }

    pub fn constant(value: f64, grid_size: usize) -> Result<Self> {
        Self::from_values(vec![value; grid_size])
    }

    /// Builds the spectrum with [`AutocovarianceSpec::default_lag_cutoff`].
    pub fn from_autocovariance(spec: &AutocovarianceSpec, grid_size: usize) -> Result<Self> {
        psd_from_autocovariance(spec, grid_size, spec.default_lag_cutoff())
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        grid_frequency(bin, self.grid_size())
    }

    /// Total power `(1/M) Σ S(f_i)`, equal to `r(0)` by Parseval.
    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_values(self.values.iter().map(|v| v * factor).collect())
    }

    /// Adds a flat (white) component to every bin.
    pub fn plus_constant(&self, level: f64) -> Result<Self> {
        let mut out = Self::from_values(self.values.iter().map(|v| v + level).collect())?;
        out.clamped = self.clamped;
        Ok(out)
    }

    /// Two-column CSV: `frequency,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "frequency,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.frequency(i), v)?;
        }
        Ok(())
    }
}

pub fn grid_frequency(bin: usize, grid_size: usize) -> f64 {
    -0.5 + bin as f64 / grid_size as f64
}

/// Evaluates the truncated cosine series `Σ_{|m|≤L} r(m) e^{-j2πmf}` on the
/// grid. Tabulated kinds ignore `lag_cutoff` and use all stored lags.
pub fn psd_from_autocovariance(
    spec: &AutocovarianceSpec,
    grid_size: usize,
    lag_cutoff: usize,
) -> Result<SpectralDensity> {
    spec.validate()?;
    if grid_size == 0 || !grid_size.is_multiple_of(2) {
        return Err(invalid("grid_size", format!("must be positive and even, got {grid_size}")));
    }
    let lag_cutoff = match spec {
        AutocovarianceSpec::Tabulated { values } => values.len() - 1,
        _ => {
            let tail = spec.tail_mass(lag_cutoff);
            if tail >= TAIL_TOLERANCE * spec.variance() && tail > 0.0 {
                return Err(Error::InsufficientLagCutoff { lag_cutoff, tail });
            }
            lag_cutoff
        }
    };
    if grid_size < 2 * lag_cutoff {
        return Err(Error::Aliasing {
            grid_size,
            lag_cutoff,
        });
    }
    let lags: Vec<f64> = (0..=lag_cutoff).map(|m| spec.lag(m as i64)).collect();
    let mut clamped = 0;
    let values = (0..grid_size)
        .map(|i| {
            let f = grid_frequency(i, grid_size);
            // Highest lags first keeps the small terms from being absorbed early.
            let mut s = 0.0;
            for m in (1..=lag_cutoff).rev() {
                s += lags[m] * (2.0 * PI * m as f64 * f).cos();
            }
            let v = lags[0] + 2.0 * s;
            if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    Ok(SpectralDensity { values, clamped })
}

/// Circular convolution on the unit frequency period,
/// `(a ⊛ b)(f_i) = (1/M) Σ_k a(f_k) b(f_i - f_k)`.
///
/// Because the grid starts at `-1/2`, the bin of `f_i - f_k` is
/// `(i - k + M/2) mod M`. Arguments are put in a canonical order first, so
/// `convolve_psd(a, b)` and `convolve_psd(b, a)` are bitwise equal.
pub fn convolve_psd(a: &SpectralDensity, b: &SpectralDensity) -> Result<SpectralDensity> {
    let m = a.grid_size();
    if m != b.grid_size() {
        return Err(Error::GridMismatch(m, b.grid_size()));
    }
    let (a, b) = if lexicographic_le(&a.values, &b.values) {
        (a, b)
    } else {
        (b, a)
    };
    let half = m / 2;
    let values = (0..m)
        .map(|i| {
            let terms: Vec<f64> = (0..m)
                .map(|k| a.values[k] * b.values[(i + m + half - k) % m])
                .collect();
            pairwise_sum(&terms) / m as f64
        })
        .collect();
    SpectralDensity::from_values(values)
}

fn lexicographic_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}

/// Midpoint evaluation of `(1/2) ∫ ln(2πe S(f)) df` in nats.
pub fn szego_entropy_rate(s: &SpectralDensity) -> Result<f64> {
    if let Some(bin) = s.values.iter().position(|v| *v <= 0.0) {
        return Err(Error::DivergentSpectrum {
            bin,
            frequency: s.frequency(bin),
        });
    }
    let logs: Vec<f64> = s.values.iter().map(|v| v.ln()).collect();
    Ok(0.5 * (LN_2PI_E + pairwise_sum(&logs) / s.grid_size() as f64))
}

/// Grid minimum and maximum of the spectrum.
pub fn psd_extrema(s: &SpectralDensity) -> (f64, f64) {
    s.values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}
