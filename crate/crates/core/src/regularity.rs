//! `(c1, c2)`-regularity: constants, the gradient inequality
//! `‖∇ ln f(x)‖ ≤ c1‖x‖ + c2`, the log-concave decay band and a
//! log-concavity falsifier.
//!
//! Every check here is probe based. A failing report carries a concrete
//! counterexample; a passing report is evidence only.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::density::{gradient_consistency_error, Density};
use crate::error::{invalid, Error, Result};
use crate::linalg::Cholesky;
use crate::numeric::norm;
use crate::sample::row_rng;

/// How `c2` scales with the block length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum C2Growth {
    Constant,
    /// `c2(n) = coefficient · √n`.
    SqrtN { coefficient: f64 },
}

/// The pair `(c1, c2)` in nats, with the growth law of `c2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    pub c1: f64,
    /// `c2` as evaluated for the block length the constants were built for.
    pub c2: f64,
    pub c2_growth: C2Growth,
}

impl RegularityConstants {
    pub fn new(c1: f64, c2: f64, c2_growth: C2Growth) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(invalid("c1", format!("must be positive and finite, got {c1}")));
        }
        if !(c2 >= 0.0 && c2.is_finite()) {
            return Err(invalid("c2", format!("must be nonnegative and finite, got {c2}")));
        }
        if let C2Growth::SqrtN { coefficient } = c2_growth {
            if !(coefficient >= 0.0 && coefficient.is_finite()) {
                return Err(invalid("c2_growth", format!("coefficient must be >= 0, got {coefficient}")));
            }
        }
        Ok(Self { c1, c2, c2_growth })
    }

    pub fn constant(c1: f64, c2: f64) -> Result<Self> {
        Self::new(c1, c2, C2Growth::Constant)
    }

    /// `c2` for block length `n`.
    pub fn c2_at(&self, n: usize) -> f64 {
        match self.c2_growth {
            C2Growth::Constant => self.c2,
            C2Growth::SqrtN { coefficient } => coefficient * (n as f64).sqrt(),
        }
    }

    pub fn growth_label(&self) -> String {
        match self.c2_growth {
            C2Growth::Constant => "constant".into(),
            C2Growth::SqrtN { coefficient } => format!("sqrt_n({coefficient})"),
        }
    }
}

/// Constants for `Y = B + Z`, `Z ~ N(0, σ_Z² I)` independent of `B`:
/// `c1 = 3/σ_Z²`, `c2 = 4 E‖B‖ / σ_Z²`.
pub fn prop2_constants(noise_variance: f64, mean_norm_bound: f64) -> Result<RegularityConstants> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(invalid("noise_variance", format!("must be positive, got {noise_variance}")));
    }
    if !(mean_norm_bound >= 0.0) {
        return Err(invalid("mean_norm_bound", format!("must be >= 0, got {mean_norm_bound}")));
    }
    RegularityConstants::constant(3.0 / noise_variance, 4.0 * mean_norm_bound / noise_variance)
}

/// Constants for the product-plus-noise model `Y = H ⊙ X + Z` at block
/// length `n`, using `E‖H ⊙ X‖ ≤ √(n r_H(0) r_X(0))`. The `c2` growth law
/// is `√n` with coefficient `4 √(r_H(0) r_X(0)) / σ_Z²`.
pub fn prop2_product_model_constants(
    noise_variance: f64,
    r_h0: f64,
    r_x0: f64,
    n: usize,
) -> Result<RegularityConstants> {
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let power = r_h0 * r_x0;
    if !(power >= 0.0) {
        return Err(invalid("r_h0", "variances must be nonnegative"));
    }
    let base = prop2_constants(noise_variance, (n as f64 * power).sqrt())?;
    RegularityConstants::new(
        base.c1,
        base.c2,
        C2Growth::SqrtN {
            coefficient: 4.0 * power.sqrt() / noise_variance,
        },
    )
}

/// Probe schedule: probe `i` sits at radius `max_radius · i / (count - 1)`
/// along a seeded uniformly random direction, so the first probe is the
/// origin and the last is on the outer sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePlan {
    pub count: usize,
    /// Defaults to `10 √(trace Σ)` of the density under test.
    pub max_radius: Option<f64>,
    pub seed: u64,
    /// Also measure analytic-vs-finite-difference gradient agreement.
    pub check_gradient: bool,
}

impl ProbePlan {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            max_radius: None,
            seed,
            check_gradient: true,
        }
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.max_radius = Some(r);
        self
    }

    pub fn without_gradient_check(mut self) -> Self {
        self.check_gradient = false;
        self
    }

    fn radius_for<D: Density + ?Sized>(&self, density: &D) -> f64 {
        self.max_radius.unwrap_or_else(|| {
            let n = density.dim();
            let cov = density.covariance();
            10.0 * (0..n).map(|i| cov[i * n + i]).sum::<f64>().sqrt()
        })
    }

    fn probe(&self, i: usize, n: usize, radius: f64) -> Vec<f64> {
        let r = if self.count > 1 {
            radius * i as f64 / (self.count - 1) as f64
        } else {
            0.0
        };
        let mut rng = row_rng(self.seed, i as u64);
        let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&dir).max(f64::MIN_POSITIVE);
        dir.iter().map(|d| r * d / len).collect()
    }
}

/// Outcome of a probe-based inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    /// Smallest slack `c1‖x‖ + c2 - ‖∇ ln f(x)‖` over all probes.
    pub worst_margin: f64,
    pub argmin_probe: Vec<f64>,
    pub probe_count: usize,
    pub seed: u64,
    /// Largest analytic-vs-difference gradient discrepancy seen, if measured.
    pub max_gradient_error: Option<f64>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// Slack below which a probe counts as a violation; absorbs rounding in
// ‖x‖ and ‖∇ ln f‖ when the inequality is tight.
fn rounding_slack(scale: f64) -> f64 {
    1e-12 * (1.0 + scale.abs())
}

/// Checks `‖∇ ln f(x)‖ ≤ c1‖x‖ + c2` on every probe.
pub fn verify_regularity<D: Density + ?Sized>(
    density: &D,
    constants: &RegularityConstants,
    plan: &ProbePlan,
) -> Result<VerificationReport> {
    let n = density.dim();
    let c2 = constants.c2_at(n);
    let radius = plan.radius_for(density);
    let mut worst = f64::INFINITY;
    let mut argmin = vec![0.0; n];
    let mut pass = true;
    let mut grad_err: Option<f64> = None;
    for i in 0..plan.count {
        let x = plan.probe(i, n, radius);
        let g = density.grad_ln_pdf(&x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::GradientFailure(x));
        }
        let bound = constants.c1 * norm(&x) + c2;
        let margin = bound - norm(&g);
        if margin < -rounding_slack(bound) {
            pass = false;
        }
        if margin < worst {
            worst = margin;
            argmin = x.clone();
        }
        if plan.check_gradient && density.has_analytic_gradient() {
            let e = gradient_consistency_error(density, &x);
            grad_err = Some(grad_err.map_or(e, |m: f64| m.max(e)));
        }
    }
    Ok(VerificationReport {
        pass,
        worst_margin: worst,
        argmin_probe: argmin,
        probe_count: plan.count,
        seed: plan.seed,
        max_gradient_error: grad_err,
    })
}

/// Upper envelope `f(x) ≤ e^{-a‖x‖ + b}` for a log-concave density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBandReport {
    pub pass: bool,
    /// Numerical mode the probes were centred on.
    pub mode: Vec<f64>,
    /// Smallest `ln f(m+x) - [ln f(m) - (c1/2)‖x‖² - c2‖x‖]`.
    pub lower_worst_margin: f64,
    pub lower_argmin: Vec<f64>,
    /// Smallest `(-a‖x‖ + b) - ln f(m+x)`.
    pub upper_worst_margin: f64,
    pub upper_argmin: Vec<f64>,
    pub probe_count: usize,
    pub seed: u64,
}

/// Gradient ascent with backtracking from the mean.
pub fn find_mode<D: Density + ?Sized>(density: &D) -> Vec<f64> {
    let mut x = density.mean();
    let mut fx = density.ln_pdf(&x);
    let mut step = 1.0;
    for _ in 0..10_000 {
        let g = density.grad_ln_pdf(&x);
        let gn = norm(&g);
        if gn < 1e-12 {
            break;
        }
        loop {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let fc = density.ln_pdf(&cand);
            if fc > fx {
                x = cand;
                fx = fc;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return x;
            }
        }
    }
    x
}

/// Checks `f(m)·e^{-(c1/2)‖x‖² - c2‖x‖} ≤ f(m+x) ≤ e^{-a‖x‖ + b}` with the
/// density re-centred at its numerical mode `m`.
pub fn decay_band_check<D: Density + ?Sized>(
    density: &D,
    constants: &RegularityConstants,
    envelope: DecayEnvelope,
    plan: &ProbePlan,
) -> Result<DecayBandReport> {
    if !(envelope.a > 0.0) {
        return Err(invalid("a", "envelope rate must be positive"));
    }
    let n = density.dim();
    let mode = find_mode(density);
    let ln_f0 = density.ln_pdf(&mode);
    if !ln_f0.is_finite() {
        return Err(Error::ZeroAtMode);
    }
    let c2 = constants.c2_at(n);
    let radius = plan.radius_for(density);
    let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
    let (mut lo_arg, mut hi_arg) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..plan.count {
        let x = plan.probe(i, n, radius);
        let r = norm(&x);
        let shifted: Vec<f64> = x.iter().zip(&mode).map(|(a, m)| a + m).collect();
        let lf = density.ln_pdf(&shifted);
        let lower = lf - (ln_f0 - 0.5 * constants.c1 * r * r - c2 * r);
        let upper = (-envelope.a * r + envelope.b) - lf;
        if lower < lo {
            lo = lower;
            lo_arg = x.clone();
        }
        if upper < hi {
            hi = upper;
            hi_arg = x;
        }
    }
    let pass = lo >= -rounding_slack(ln_f0) && hi >= -rounding_slack(ln_f0);
    Ok(DecayBandReport {
        pass,
        mode,
        lower_worst_margin: lo,
        lower_argmin: lo_arg,
        upper_worst_margin: hi,
        upper_argmin: hi_arg,
        probe_count: plan.count,
        seed: plan.seed,
    })
}

/// A certified violation of midpoint log-concavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub pass: bool,
    /// Smallest `ln f(λx + (1-λ)y) - λ ln f(x) - (1-λ) ln f(y) + 1e-9`.
    pub worst_margin: f64,
    pub witness: Option<ConcavityWitness>,
    pub violations: usize,
    pub pair_count: usize,
    pub seed: u64,
}

/// Samples pairs from `N(mean, 4Σ)` and `λ ~ U(0, 1)` and tests
/// `ln f(λx + (1-λ)y) ≥ λ ln f(x) + (1-λ) ln f(y) - 1e-9`.
pub fn log_concavity_probe<D: Density + ?Sized>(
    density: &D,
    pair_count: usize,
    seed: u64,
) -> Result<ConcavityReport> {
    let n = density.dim();
    let mean = density.mean();
    let cov: Vec<f64> = density.covariance().iter().map(|v| 4.0 * v).collect();
    let chol = Cholesky::from_dense(n, &cov)?;
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; n];
        chol.mul_lower(&z, &mut out);
        out.iter().zip(&mean).map(|(a, m)| a + m).collect::<Vec<f64>>()
    };
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut violations = 0;
    for i in 0..pair_count {
        let mut rng = row_rng(seed, i as u64);
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let lambda: f64 = rng.random_range(0.0..1.0);
        let mid: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let margin = density.ln_pdf(&mid) - lambda * density.ln_pdf(&x)
            - (1.0 - lambda) * density.ln_pdf(&y)
            + 1e-9;
        if margin < 0.0 {
            violations += 1;
        }
        if margin < worst {
            worst = margin;
            if margin < 0.0 {
                witness = Some(ConcavityWitness { x, y, lambda });
            }
        }
    }
    Ok(ConcavityReport {
        pass: violations == 0,
        worst_margin: worst,
        witness,
        violations,
        pair_count,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Gaussian, GaussianMixture, Logistic};
    use proptest::prelude::*;

    #[test]
    fn noise_smoothing_constants_examples() {
        let c = prop2_constants(1.0, 0.0).unwrap();
        assert_eq!((c.c1, c.c2), (3.0, 0.0));
        let c = prop2_product_model_constants(1.0, 1.0, 1.0, 4).unwrap();
        assert_eq!(c.c2, 8.0);
        assert_eq!(c.c2_at(4), 8.0);
        assert_eq!(c.c2_growth, C2Growth::SqrtN { coefficient: 4.0 });
        let c = prop2_constants(100.0, 7.0).unwrap();
        assert!((c.c1 - 0.03).abs() < 1e-15);
        assert!(prop2_constants(0.0, 1.0).is_err());
        assert!(prop2_constants(-1.0, 1.0).is_err());
    }

    #[test]
    fn noise_smoothing_constants_scale() {
        for s in [0.3, 1.0, 7.5] {
            let a = prop2_constants(s, 1.0).unwrap();
            let b = prop2_constants(2.0 * s, 1.0).unwrap();
            assert_eq!(b.c1, a.c1 / 2.0);
        }
    }

    #[test]
    fn constants_reject_bad_signs() {
        assert!(RegularityConstants::constant(0.0, 1.0).is_err());
        assert!(RegularityConstants::constant(1.0, -1.0).is_err());
        assert!(RegularityConstants::new(1.0, 0.0, C2Growth::SqrtN { coefficient: -1.0 }).is_err());
    }

    #[test]
    fn gaussian_is_tight_with_unit_constant() {
        let g = Gaussian::standard(3);
        let c = RegularityConstants::constant(1.0, 0.0).unwrap();
        let r = verify_regularity(&g, &c, &ProbePlan::new(10_000, 1)).unwrap();
        assert!(r.pass);
        assert!(r.worst_margin >= 0.0 && r.worst_margin < 1e-12, "{}", r.worst_margin);
        assert!(r.max_gradient_error.unwrap() < 1e-4);
    }

    #[test]
    fn gaussian_fails_with_half_constant() {
        let g = Gaussian::standard(2);
        let c = RegularityConstants::constant(0.5, 0.0).unwrap();
        let r = verify_regularity(&g, &c, &ProbePlan::new(100, 2)).unwrap();
        assert!(!r.pass);
        // The counterexample really violates the inequality.
        let x = &r.argmin_probe;
        assert!(norm(&g.grad_ln_pdf(x)) > 0.5 * norm(x));
        assert!(r.worst_margin < 0.0);
    }

    #[test]
    fn logistic_passes() {
        let c = RegularityConstants::constant(0.01, 1.0).unwrap();
        let r = verify_regularity(&Logistic::standard(), &c, &ProbePlan::new(10_000, 3)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn report_serializes() {
        let c = RegularityConstants::constant(1.0, 0.0).unwrap();
        let r = verify_regularity(&Gaussian::standard(1), &c, &ProbePlan::new(5, 9)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["pass", "worst_margin", "argmin_probe", "probe_count", "seed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn decay_band_examples() {
        let g = Gaussian::standard(1);
        let c = RegularityConstants::constant(1.0, 0.0).unwrap();
        let env = DecayEnvelope {
            a: 1.0,
            b: g.ln_pdf(&[0.0]) + 0.5,
        };
        let r = decay_band_check(&g, &c, env, &ProbePlan::new(2001, 4).with_radius(10.0)).unwrap();
        assert!(r.pass, "{r:?}");

        let l = Logistic::standard();
        let c = RegularityConstants::constant(0.01, 1.0).unwrap();
        let r = decay_band_check(&l, &c, DecayEnvelope { a: 1.0, b: 0.0 }, &ProbePlan::new(2001, 5))
            .unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.mode[0].abs() < 1e-8);

        // At x = 0 the lower side is f(0) <= f(0).
        let single = decay_band_check(&l, &c, DecayEnvelope { a: 1.0, b: 0.0 }, &ProbePlan::new(1, 5))
            .unwrap();
        assert!(single.lower_worst_margin.abs() < 1e-12);
    }

    #[test]
    fn decay_band_detects_wrong_envelope() {
        let g = Gaussian::standard(1);
        let c = RegularityConstants::constant(1.0, 0.0).unwrap();
        // b too small: e^{-|x| + b} falls below f near the mode.
        let env = DecayEnvelope { a: 1.0, b: -5.0 };
        let r = decay_band_check(&g, &c, env, &ProbePlan::new(101, 4)).unwrap();
        assert!(!r.pass && r.upper_worst_margin < 0.0);
    }

    #[test]
    fn log_concavity_classification() {
        assert!(log_concavity_probe(&Gaussian::standard(2), 5000, 1).unwrap().pass);
        assert!(log_concavity_probe(&Logistic::standard(), 5000, 2).unwrap().pass);
        let mix = GaussianMixture::univariate(&[0.0, 6.0], 1.0).unwrap();
        let r = log_concavity_probe(&mix, 5000, 3).unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        let mid = [w.lambda * w.x[0] + (1.0 - w.lambda) * w.y[0]];
        assert!(
            mix.ln_pdf(&mid) < w.lambda * mix.ln_pdf(&w.x) + (1.0 - w.lambda) * mix.ln_pdf(&w.y)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn larger_constants_never_fail(
            c1 in 0.2f64..3.0, c2 in 0.0f64..2.0, d1 in 0.0f64..2.0, d2 in 0.0f64..2.0, seed in 0u64..1000
        ) {
            let mix = GaussianMixture::univariate(&[-1.5, 1.5], 0.8).unwrap();
            let plan = ProbePlan::new(200, seed).without_gradient_check();
            let small = verify_regularity(&mix, &RegularityConstants::constant(c1, c2).unwrap(), &plan).unwrap();
            let big = verify_regularity(&mix, &RegularityConstants::constant(c1 + d1, c2 + d2).unwrap(), &plan).unwrap();
            if small.pass {
                prop_assert!(big.pass);
            }
            prop_assert!(big.worst_margin >= small.worst_margin);
        }

        #[test]
        fn gaussian_constants_from_eigenvalues_pass(a in -0.9f64..0.9, n in 1usize..6, seed in 0u64..1000) {
            let spec = crate::spectra::AutocovarianceSpec::ar1(1.0, a).unwrap();
            let cov = crate::toeplitz::build_covariance(&spec, n).unwrap();
            let c = crate::toeplitz::gaussian_regularity_c1(&cov).unwrap();
            let g = Gaussian::new(vec![0.0; n], cov.to_dense()).unwrap();
            let r = verify_regularity(&g, &c, &ProbePlan::new(300, seed)).unwrap();
            prop_assert!(r.pass && r.worst_margin >= -1e-10, "{:?}", r);
            prop_assert!(r.max_gradient_error.unwrap() < 1e-4);
        }
    }
}
