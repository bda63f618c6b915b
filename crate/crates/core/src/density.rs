//! Evaluable, samplable densities: the handles that regularity checks,
//! quadrature and Monte Carlo oracles operate on.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::Cholesky;
use crate::numeric::{log_sum_exp, norm};
use crate::sample::{row_rng, Provenance, SampleMatrix};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A density on ℝⁿ with log-density, log-gradient, first two moments and a
/// sampler.
pub trait Density: Send + Sync {
    fn dim(&self) -> usize;

    fn ln_pdf(&self, x: &[f64]) -> f64;

    fn pdf(&self, x: &[f64]) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `∇ ln f(x)`. Defaults to central differences.
    fn grad_ln_pdf(&self, x: &[f64]) -> Vec<f64> {
        finite_difference_gradient(self, x)
    }

    fn has_analytic_gradient(&self) -> bool {
        false
    }

    fn mean(&self) -> Vec<f64>;

    /// Row-major `n × n` covariance.
    fn covariance(&self) -> Vec<f64>;

    fn sample(&self, count: usize, seed: u64) -> SampleMatrix;

    fn name(&self) -> String;
}

/// Central differences of `ln f` with step `1e-5 · (1 + ‖x‖)`.
pub fn finite_difference_gradient<D: Density + ?Sized>(density: &D, x: &[f64]) -> Vec<f64> {
    let h = 1e-5 * (1.0 + norm(x));
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = density.ln_pdf(&probe);
            probe[i] = x[i] - h;
            let down = density.ln_pdf(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest deviation between the analytic and finite-difference gradients,
/// measured as `‖g_a - g_fd‖ / (1 + ‖g_a‖)`.
pub fn gradient_consistency_error<D: Density + ?Sized>(density: &D, x: &[f64]) -> f64 {
    let analytic = density.grad_ln_pdf(x);
    let fd = finite_difference_gradient(density, x);
    let diff: Vec<f64> = analytic.iter().zip(&fd).map(|(a, b)| a - b).collect();
    norm(&diff) / (1.0 + norm(&analytic))
}

fn provenance(method: &str, seed: u64) -> Provenance {
    Provenance {
        method: method.into(),
        seed,
    }
}

/// Multivariate normal `N(μ, Σ)` with `Σ` positive definite.
#[derive(Debug, Clone)]
pub struct Gaussian {
    mean: Vec<f64>,
    cov: Vec<f64>,
    chol: Cholesky,
    ln_norm: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(invalid("mean", "dimension must be positive"));
        }
        if cov.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: cov.len(),
            });
        }
        let chol = Cholesky::from_dense(n, &cov)?;
        let ln_norm = -0.5 * (n as f64 * LN_2PI + chol.log_det());
        Ok(Self {
            mean,
            cov,
            chol,
            ln_norm,
        })
    }

    pub fn standard(n: usize) -> Self {
        Self::isotropic(vec![0.0; n], 1.0).expect("identity is positive definite")
    }

    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let n = mean.len();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            cov[i * n + i] = variance;
        }
        Self::new(mean, cov)
    }

    /// `N(μ, σ²)` on the line.
    pub fn univariate(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![mean], vec![variance])
    }

    /// The Gaussian with the same mean and covariance as `d`.
    pub fn moment_matched<D: Density + ?Sized>(d: &D) -> Result<Self> {
        Self::new(d.mean(), d.covariance())
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// Closed-form differential entropy in nats.
    pub fn entropy(&self) -> f64 {
        0.5 * (self.mean.len() as f64 * (LN_2PI + 1.0) + self.chol.log_det())
    }

    fn centered(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).map(|(a, m)| a - m).collect()
    }
}

impl Density for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn ln_pdf(&self, x: &[f64]) -> f64 {
        self.ln_norm - 0.5 * self.chol.inverse_quadratic_form(&self.centered(x))
    }

    fn grad_ln_pdf(&self, x: &[f64]) -> Vec<f64> {
        self.chol.solve(&self.centered(x)).into_iter().map(|v| -v).collect()
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn mean(&self) -> Vec<f64> {
        self.mean.clone()
    }

    fn covariance(&self) -> Vec<f64> {
        self.cov.clone()
    }

    fn sample(&self, count: usize, seed: u64) -> SampleMatrix {
        let n = self.dim();
        let mut values = vec![0.0; n * count];
        values.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            let mut rng = row_rng(seed, i as u64);
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            self.chol.mul_lower(&z, out);
            for (o, m) in out.iter_mut().zip(&self.mean) {
                *o += m;
            }
        });
        SampleMatrix::new(n, values, provenance("gaussian", seed)).expect("finite draws")
    }

    fn name(&self) -> String {
        if self.dim() == 1 {
            format!("gaussian(mean={}, var={})", self.mean[0], self.cov[0])
        } else {
            format!("gaussian(n={})", self.dim())
        }
    }
}

/// Logistic density `f(x) = e^{-z} / (s (1 + e^{-z})²)`, `z = (x - μ)/s`.
#[derive(Debug, Clone, Copy)]
pub struct Logistic {
    pub location: f64,
    pub scale: f64,
}

impl Logistic {
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && location.is_finite()) {
            return Err(invalid("scale", format!("must be positive and finite, got {scale}")));
        }
        Ok(Self { location, scale })
    }

    pub fn standard() -> Self {
        Self {
            location: 0.0,
            scale: 1.0,
        }
    }

    /// Differential entropy `ln s + 2` nats.
    pub fn entropy(&self) -> f64 {
        self.scale.ln() + 2.0
    }
}

impl Density for Logistic {
    fn dim(&self) -> usize {
        1
    }

    fn ln_pdf(&self, x: &[f64]) -> f64 {
        let z = ((x[0] - self.location) / self.scale).abs();
        -z - 2.0 * (-z).exp().ln_1p() - self.scale.ln()
    }

    fn grad_ln_pdf(&self, x: &[f64]) -> Vec<f64> {
        let z = (x[0] - self.location) / self.scale;
        vec![-(0.5 * z).tanh() / self.scale]
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn mean(&self) -> Vec<f64> {
        vec![self.location]
    }

    fn covariance(&self) -> Vec<f64> {
        vec![self.scale * self.scale * std::f64::consts::PI.powi(2) / 3.0]
    }

    fn sample(&self, count: usize, seed: u64) -> SampleMatrix {
        let values = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = row_rng(seed, i as u64);
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                self.location + self.scale * (u / (1.0 - u)).ln()
            })
            .collect();
        SampleMatrix::new(1, values, provenance("logistic", seed)).expect("finite draws")
    }

    fn name(&self) -> String {
        format!("logistic(loc={}, scale={})", self.location, self.scale)
    }
}

/// Finite mixture of Gaussians `Σ_k w_k N(μ_k, Σ_k)`.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    ln_weights: Vec<f64>,
    weights: Vec<f64>,
    components: Vec<Gaussian>,
    label: String,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, components: Vec<Gaussian>) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(invalid("weights", "need one positive weight per component"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("weights", "weights must be positive"));
        }
        let n = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.dim(),
            });
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let label = format!("gaussian_mixture(k={}, n={n})", components.len());
        Ok(Self {
            ln_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            components,
            label,
        })
    }

    /// Equal-weight 1D mixture of `N(μ_k, σ²)`.
    pub fn univariate(means: &[f64], variance: f64) -> Result<Self> {
        let comps = means
            .iter()
            .map(|m| Gaussian::univariate(*m, variance))
            .collect::<Result<Vec<_>>>()?;
        let mut mix = Self::new(vec![1.0; means.len()], comps)?;
        mix.label = format!("gaussian_mixture(means={means:?}, var={variance})");
        Ok(mix)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.components
    }

    fn component_log_terms(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .zip(&self.ln_weights)
            .map(|(c, lw)| lw + c.ln_pdf(x))
            .collect()
    }
}

impl Density for GaussianMixture {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn ln_pdf(&self, x: &[f64]) -> f64 {
        log_sum_exp(&self.component_log_terms(x))
    }

    fn grad_ln_pdf(&self, x: &[f64]) -> Vec<f64> {
        let terms = self.component_log_terms(x);
        let total = log_sum_exp(&terms);
        let mut g = vec![0.0; self.dim()];
        for (c, t) in self.components.iter().zip(&terms) {
            let resp = (t - total).exp();
            if resp == 0.0 {
                continue;
            }
            for (gi, ci) in g.iter_mut().zip(c.grad_ln_pdf(x)) {
                *gi += resp * ci;
            }
        }
        g
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (w, c) in self.weights.iter().zip(&self.components) {
            for (mi, ci) in m.iter_mut().zip(&c.mean) {
                *mi += w * ci;
            }
        }
        m
    }

    fn covariance(&self) -> Vec<f64> {
        let n = self.dim();
        let mu = self.mean();
        let mut cov = vec![0.0; n * n];
        for (w, c) in self.weights.iter().zip(&self.components) {
            for i in 0..n {
                for j in 0..n {
                    cov[i * n + j] +=
                        w * (c.cov[i * n + j] + (c.mean[i] - mu[i]) * (c.mean[j] - mu[j]));
                }
            }
        }
        cov
    }

    fn sample(&self, count: usize, seed: u64) -> SampleMatrix {
        let n = self.dim();
        let cumulative: Vec<f64> = self
            .weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let mut values = vec![0.0; n * count];
        values.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            let mut rng = row_rng(seed, i as u64);
            let u: f64 = rng.random();
            let k = cumulative
                .iter()
                .position(|c| u < *c)
                .unwrap_or(self.components.len() - 1);
            let comp = &self.components[k];
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            comp.chol.mul_lower(&z, out);
            for (o, m) in out.iter_mut().zip(&comp.mean) {
                *o += m;
            }
        });
        SampleMatrix::new(n, values, provenance("gaussian_mixture", seed)).expect("finite draws")
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}
