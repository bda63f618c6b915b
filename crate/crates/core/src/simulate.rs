//! Sample paths of stationary Gaussian processes and of the product model
//! `Y = H ⊙ X + Z`.
//!
//! Component streams use sub-seeds `seed ^ 1` (H), `seed ^ 2` (X) and
//! `seed ^ 3` (Z), so the three components are independent and each is
//! reproducible on its own.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{Gaussian, GaussianMixture};
use crate::error::{invalid, Error, Result};
use crate::regularity::{prop2_product_model_constants, C2Growth, RegularityConstants};
use crate::sample::{row_rng, Provenance, SampleMatrix};
use crate::spectra::{convolve_psd, AutocovarianceSpec, SpectralDensity};
use crate::toeplitz::{build_covariance, cholesky_sampler, gaussian_regularity_c1, ToeplitzCovariance};

pub const SUB_SEED_H: u64 = 1;
pub const SUB_SEED_X: u64 = 2;
pub const SUB_SEED_Z: u64 = 3;
/// Largest block length for [`model_density`] (2ⁿ mixture components).
pub const MAX_MIXTURE_DIM: usize = 8;

/// A stationary process model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessModel {
    Gaussian {
        spec: AutocovarianceSpec,
        #[serde(default)]
        mean: f64,
    },
    /// `H ⊙ X + Z` with independent zero-mean Gaussian `H`, `X` and white
    /// Gaussian `Z`.
    ProductNoise {
        spec_h: AutocovarianceSpec,
        spec_x: AutocovarianceSpec,
        noise_variance: f64,
    },
    /// Like `ProductNoise` but `X` is i.i.d. uniform on `{-1, +1}`, which
    /// makes the block density a finite Gaussian mixture.
    TwoPointProductNoise {
        spec_h: AutocovarianceSpec,
        noise_variance: f64,
    },
}

impl ProcessModel {
    pub fn gaussian(spec: AutocovarianceSpec) -> Self {
        Self::Gaussian { spec, mean: 0.0 }
    }

    pub fn product_noise(spec_h: AutocovarianceSpec, spec_x: AutocovarianceSpec, noise_variance: f64) -> Self {
        Self::ProductNoise {
            spec_h,
            spec_x,
            noise_variance,
        }
    }

    pub fn two_point(spec_h: AutocovarianceSpec, noise_variance: f64) -> Self {
        Self::TwoPointProductNoise { spec_h, noise_variance }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { spec, mean } => {
                spec.validate()?;
                if !mean.is_finite() {
                    return Err(invalid("mean", "must be finite"));
                }
            }
            Self::ProductNoise {
                spec_h,
                spec_x,
                noise_variance,
            } => {
                spec_h.validate()?;
                spec_x.validate()?;
                check_noise(*noise_variance, true)?;
            }
            Self::TwoPointProductNoise { spec_h, noise_variance } => {
                spec_h.validate()?;
                check_noise(*noise_variance, false)?;
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Self::Gaussian { spec, mean } if *mean != 0.0 => format!("gaussian({}, mean={mean})", spec.label()),
            Self::Gaussian { spec, .. } => format!("gaussian({})", spec.label()),
            Self::ProductNoise {
                spec_h,
                spec_x,
                noise_variance,
            } => format!("product_noise({}, {}, {noise_variance})", spec_h.label(), spec_x.label()),
            Self::TwoPointProductNoise { spec_h, noise_variance } => {
                format!("two_point_product_noise({}, {noise_variance})", spec_h.label())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mean, .. } => *mean,
            _ => 0.0,
        }
    }

    /// Per-coordinate variance: `r(0)`, or `r_H(0) r_X(0) + σ_Z²`.
    pub fn implied_variance(&self) -> f64 {
        match self {
            Self::Gaussian { spec, .. } => spec.variance(),
            Self::ProductNoise {
                spec_h,
                spec_x,
                noise_variance,
            } => spec_h.variance() * spec_x.variance() + noise_variance,
            Self::TwoPointProductNoise { spec_h, noise_variance } => spec_h.variance() + noise_variance,
        }
    }

    /// `E[Y_k²] = μ² + variance`.
    pub fn second_moment(&self) -> f64 {
        self.mean().powi(2) + self.implied_variance()
    }

    /// Autocovariance of the output process at `lag`.
    pub fn autocovariance(&self, lag: i64) -> f64 {
        let white = |v: f64| if lag == 0 { v } else { 0.0 };
        match self {
            Self::Gaussian { spec, .. } => spec.lag(lag),
            Self::ProductNoise {
                spec_h,
                spec_x,
                noise_variance,
            } => spec_h.lag(lag) * spec_x.lag(lag) + white(*noise_variance),
            Self::TwoPointProductNoise { spec_h, noise_variance } => white(spec_h.lag(lag) + noise_variance),
        }
    }

    /// Regularity constants of the block density at length `n`: the
    /// covariance eigenvalue constant for Gaussian models, the noise
    /// smoothing constants otherwise.
    pub fn regularity_constants(&self, n: usize) -> Result<RegularityConstants> {
        match self {
            Self::Gaussian { spec, mean } => {
                let c = gaussian_regularity_c1(&build_covariance(spec, n)?)?;
                with_mean_offset(c, *mean, n)
            }
            Self::ProductNoise {
                spec_h,
                spec_x,
                noise_variance,
            } => prop2_product_model_constants(*noise_variance, spec_h.variance(), spec_x.variance(), n),
            Self::TwoPointProductNoise { spec_h, noise_variance } => {
                prop2_product_model_constants(*noise_variance, spec_h.variance(), 1.0, n)
            }
        }
    }
}

/// `‖Σ⁻¹(x - μ1)‖ ≤ c1‖x‖ + c1|μ|√n`: a nonzero mean adds a `√n` term.
pub(crate) fn with_mean_offset(c: RegularityConstants, mean: f64, n: usize) -> Result<RegularityConstants> {
    if mean == 0.0 {
        return Ok(c);
    }
    let coefficient = c.c1 * mean.abs();
    RegularityConstants::new(c.c1, coefficient * (n as f64).sqrt(), C2Growth::SqrtN { coefficient })
}

/// Toeplitz covariance of `n` consecutive outputs.
pub fn model_covariance(model: &ProcessModel, n: usize) -> Result<ToeplitzCovariance> {
    model.validate()?;
    ToeplitzCovariance::from_first_row((0..n as i64).map(|l| model.autocovariance(l)).collect())
}

fn check_noise(v: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { v >= 0.0 } else { v > 0.0 };
    if !(ok && v.is_finite()) {
        return Err(invalid("noise_variance", format!("must be {}, got {v}", if allow_zero { "nonnegative" } else { "positive" })));
    }
    Ok(())
}

fn iid_rows(n: usize, count: usize, seed: u64, draw: impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync) -> Vec<f64> {
    let mut values = vec![0.0; n * count];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let mut rng = row_rng(seed, i as u64);
        for v in row {
            *v = draw(&mut rng);
        }
    });
    values
}

/// `count` independent length-`n` blocks of the model.
pub fn sample_path(model: &ProcessModel, n: usize, count: usize, seed: u64) -> Result<SampleMatrix> {
    model.validate()?;
    if n == 0 || count == 0 {
        return Err(invalid("n", "block length and count must be positive"));
    }
    let provenance = Provenance {
        method: model.label(),
        seed,
    };
    let values = match model {
        ProcessModel::Gaussian { spec, mean } => {
            let x = cholesky_sampler(&build_covariance(spec, n)?, count, seed)?;
            x.as_slice().iter().map(|v| v + mean).collect()
        }
        ProcessModel::ProductNoise {
            spec_h,
            spec_x,
            noise_variance,
        } => {
            let h = cholesky_sampler(&build_covariance(spec_h, n)?, count, seed ^ SUB_SEED_H)?;
            let x = cholesky_sampler(&build_covariance(spec_x, n)?, count, seed ^ SUB_SEED_X)?;
            let sd = noise_variance.sqrt();
            let z = iid_rows(n, count, seed ^ SUB_SEED_Z, |r| sd * r.sample::<f64, _>(StandardNormal));
            combine(h.as_slice(), x.as_slice(), &z)
        }
        ProcessModel::TwoPointProductNoise { spec_h, noise_variance } => {
            let h = cholesky_sampler(&build_covariance(spec_h, n)?, count, seed ^ SUB_SEED_H)?;
            let x = iid_rows(n, count, seed ^ SUB_SEED_X, |r| if r.random::<bool>() { 1.0 } else { -1.0 });
            let sd = noise_variance.sqrt();
            let z = iid_rows(n, count, seed ^ SUB_SEED_Z, |r| sd * r.sample::<f64, _>(StandardNormal));
            combine(h.as_slice(), &x, &z)
        }
    };
    SampleMatrix::new(n, values, provenance)
}

fn combine(h: &[f64], x: &[f64], z: &[f64]) -> Vec<f64> {
    h.iter().zip(x).zip(z).map(|((h, x), z)| h * x + z).collect()
}

/// Spectral density of the output process on `grid_size` bins.
pub fn model_psd(model: &ProcessModel, grid_size: usize) -> Result<SpectralDensity> {
    model.validate()?;
    match model {
        ProcessModel::Gaussian { spec, .. } => SpectralDensity::from_autocovariance(spec, grid_size),
        ProcessModel::ProductNoise {
            spec_h,
            spec_x,
            noise_variance,
        } => {
            let sh = SpectralDensity::from_autocovariance(spec_h, grid_size)?;
            let sx = SpectralDensity::from_autocovariance(spec_x, grid_size)?;
            convolve_psd(&sh, &sx)?.plus_constant(*noise_variance)
        }
        // i.i.d. ±1 has a flat unit spectrum.
        ProcessModel::TwoPointProductNoise { spec_h, noise_variance } => {
            let sh = SpectralDensity::from_autocovariance(spec_h, grid_size)?;
            convolve_psd(&sh, &SpectralDensity::constant(1.0, grid_size)?)?.plus_constant(*noise_variance)
        }
    }
}

/// Exact block density of the two-point model:
/// `Σ_s 2⁻ⁿ N(0, D_s R_H D_s + σ_Z² I)` over sign patterns `s`.
pub fn model_density(model: &ProcessModel, n: usize) -> Result<GaussianMixture> {
    let ProcessModel::TwoPointProductNoise { spec_h, noise_variance } = model else {
        return Err(Error::Unsupported(format!(
            "no closed-form density for {}; use the two-point model",
            model.label()
        )));
    };
    model.validate()?;
    if n == 0 || n > MAX_MIXTURE_DIM {
        return Err(invalid("n", format!("need 1 <= n <= {MAX_MIXTURE_DIM}, got {n}")));
    }
    let r = build_covariance(spec_h, n)?;
    let components = (0..1usize << n)
        .map(|s| {
            let sign = |i: usize| if s >> i & 1 == 1 { -1.0 } else { 1.0 };
            let mut cov = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    cov[i * n + j] = sign(i) * sign(j) * r.entry(i, j);
                }
                cov[i * n + i] += noise_variance;
            }
            Gaussian::new(vec![0.0; n], cov)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GaussianMixture::new(vec![1.0; 1 << n], components)?.with_label(format!("{} n={n}", model.label())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Density;
    use crate::estimators::{entropy_quadrature, kl_monte_carlo};
    use crate::regularity::{verify_regularity, ProbePlan};
    use crate::spectra::psd_from_autocovariance;
    use proptest::prelude::*;

    fn white() -> AutocovarianceSpec {
        AutocovarianceSpec::white(1.0).unwrap()
    }

    fn ar(a: f64) -> AutocovarianceSpec {
        AutocovarianceSpec::ar1(1.0, a).unwrap()
    }

    fn variance_with_error(column: &[f64]) -> (f64, f64) {
        let sq: Vec<f64> = column.iter().map(|v| v * v).collect();
        (crate::numeric::mean(&sq), (crate::numeric::variance(&sq) / sq.len() as f64).sqrt())
    }

    #[test]
    fn sample_path_examples() {
        let g = sample_path(&ProcessModel::gaussian(white()), 1, 100_000, 1).unwrap();
        let (v, se) = variance_with_error(&g.column(0));
        assert!((v - 1.0).abs() < 3.0 * se);

        let p = sample_path(&ProcessModel::product_noise(white(), white(), 1.0), 1, 100_000, 2).unwrap();
        let (v, se) = variance_with_error(&p.column(0));
        assert!((v - 2.0).abs() < 3.0 * se, "{v} ± {se}");

        let p = sample_path(&ProcessModel::product_noise(ar(0.5), ar(0.5), 1.0), 2, 100_000, 3).unwrap();
        let (c, se) = p.covariance_with_error(0, 1);
        assert!((c - 0.25).abs() < 3.0 * se, "{c} ± {se}");
    }

    #[test]
    fn product_covariance_matches_model() {
        let model = ProcessModel::product_noise(ar(0.6), AutocovarianceSpec::ma(vec![1.0, 0.4], 1.0).unwrap(), 0.5);
        let n = 8;
        let y = sample_path(&model, n, 60_000, 4).unwrap();
        for a in 0..n {
            for b in a..n {
                let (c, se) = y.covariance_with_error(a, b);
                let want = model.autocovariance((b - a) as i64);
                assert!((c - want).abs() < 5.0 * se, "lag {} at {a}: {c} vs {want}", b - a);
            }
        }
    }

    #[test]
    fn components_use_distinct_streams() {
        let model = ProcessModel::product_noise(white(), white(), 1.0);
        let y = sample_path(&model, 1, 100_000, 9).unwrap();
        // Independent unit H, X, Z give E[Y^4] = 9 + 6 + 3 = 18; a shared
        // H/X stream would give E[H^4 X^4]-dominated values far above that.
        let q: Vec<f64> = y.column(0).iter().map(|v| v.powi(4)).collect();
        let (m4, se) = (crate::numeric::mean(&q), (crate::numeric::variance(&q) / q.len() as f64).sqrt());
        assert!((m4 - 18.0).abs() < 5.0 * se, "{m4} ± {se}");
        let h = cholesky_sampler(&build_covariance(&white(), 1).unwrap(), 5, 9 ^ SUB_SEED_H).unwrap();
        let x = cholesky_sampler(&build_covariance(&white(), 1).unwrap(), 5, 9 ^ SUB_SEED_X).unwrap();
        assert_ne!(h.as_slice(), x.as_slice());
    }

    #[test]
    fn sampling_is_deterministic() {
        for model in [
            ProcessModel::gaussian(ar(0.5)),
            ProcessModel::product_noise(ar(0.5), white(), 1.0),
            ProcessModel::two_point(ar(0.9), 0.1),
        ] {
            assert_eq!(sample_path(&model, 4, 1000, 77).unwrap(), sample_path(&model, 4, 1000, 77).unwrap());
        }
    }

    #[test]
    fn psd_examples() {
        let s = model_psd(&ProcessModel::product_noise(white(), white(), 1.0), 64).unwrap();
        assert!(s.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let s = model_psd(&ProcessModel::product_noise(ar(0.5), white(), 0.0), 256).unwrap();
        assert!(s.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
        let direct = psd_from_autocovariance(&ar(0.5), 512, ar(0.5).default_lag_cutoff()).unwrap();
        assert_eq!(model_psd(&ProcessModel::gaussian(ar(0.5)), 512).unwrap(), direct);
    }

    #[test]
    fn density_examples() {
        let d = model_density(&ProcessModel::two_point(white(), 1.0), 1).unwrap();
        let g = Gaussian::univariate(0.0, 2.0).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.7] {
            assert!((d.ln_pdf(&[x]) - g.ln_pdf(&[x])).abs() < 1e-12);
        }
        let d = model_density(&ProcessModel::two_point(white(), 1.0), 2).unwrap();
        let g = Gaussian::isotropic(vec![0.0, 0.0], 2.0).unwrap();
        for x in [[0.3, -1.2], [2.0, 2.0]] {
            assert!((d.ln_pdf(&x) - g.ln_pdf(&x)).abs() < 1e-12);
        }

        let model = ProcessModel::two_point(ar(0.9), 0.1);
        let d = model_density(&model, 2).unwrap();
        let g = Gaussian::moment_matched(&d).unwrap();
        let kl = kl_monte_carlo(&d, &g, &sample_path(&model, 2, 100_000, 5).unwrap()).unwrap();
        assert!(kl.value > 5.0 * kl.std_error, "{kl:?}");

        assert!(model_density(&model, 9).is_err());
        assert!(model_density(&ProcessModel::gaussian(white()), 2).is_err());
    }

    #[test]
    fn density_matches_samples() {
        // the exact density and the sampler describe the same law
        let model = ProcessModel::two_point(ar(0.7), 0.5);
        let d = model_density(&model, 3).unwrap();
        let y = sample_path(&model, 3, 50_000, 6).unwrap();
        let cov = d.covariance();
        for a in 0..3 {
            for b in 0..3 {
                let (c, se) = y.covariance_with_error(a, b);
                assert!((c - cov[a * 3 + b]).abs() < 5.0 * se);
            }
        }
    }

    #[test]
    fn density_normalizes() {
        let d1 = model_density(&ProcessModel::two_point(ar(0.9), 0.5), 1).unwrap();
        let e = entropy_quadrature(&d1, &[(-12.0, 12.0)], 4001).unwrap();
        assert!(e.std_error < 1e-6);
        let d2 = model_density(&ProcessModel::two_point(ar(0.9), 0.5), 2).unwrap();
        let e = entropy_quadrature(&d2, &[(-12.0, 12.0), (-12.0, 12.0)], 800).unwrap();
        assert!(e.std_error < 1e-6);
    }

    #[test]
    fn mixture_regularity_certified() {
        for sigma2 in [0.1, 0.5, 1.0] {
            let model = ProcessModel::two_point(ar(0.9), sigma2);
            for n in [1, 2, 4] {
                let d = model_density(&model, n).unwrap();
                let c = model.regularity_constants(n).unwrap();
                assert!((c.c1 - 3.0 / sigma2).abs() < 1e-12);
                assert!((c.c2_at(n) - 4.0 * (n as f64).sqrt() / sigma2).abs() < 1e-12);
                let r = verify_regularity(&d, &c, &ProbePlan::new(500, 3)).unwrap();
                assert!(r.pass && r.worst_margin >= 0.0, "{r:?}");
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let m = ProcessModel::product_noise(ar(0.5), white(), 1.0);
        let text = toml::to_string(&m).unwrap();
        assert_eq!(toml::from_str::<ProcessModel>(&text).unwrap(), m);
        let j = serde_json::to_string(&m).unwrap();
        assert!(j.contains("\"kind\":\"product_noise\""));
    }

    #[test]
    fn rejects_bad_noise() {
        let m = ProcessModel::product_noise(white(), white(), -1.0);
        match m.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "noise_variance"),
            other => panic!("{other:?}"),
        }
        assert!(sample_path(&m, 1, 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn lag_zero_moment_matches(a in -0.8f64..0.8, s in 0.2f64..2.0, seed in 0u64..1000) {
            let model = ProcessModel::product_noise(ar(a), white(), s);
            let y = sample_path(&model, 3, 20_000, seed).unwrap();
            for j in 0..3 {
                let (v, se) = variance_with_error(&y.column(j));
                prop_assert!((v - model.implied_variance()).abs() < 5.0 * se);
            }
        }
    }
}
