//! Independent numerical oracles: entropy by quadrature and by nearest
//! neighbors, KL divergence by quadrature and Monte Carlo, and Wasserstein-2
//! by quantile coupling, Gaussian closed form and exact assignment.

mod assignment;
mod kdtree;

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::density::Density;
use crate::error::{invalid, Error, Result};
use crate::linalg::{matmul, symmetric_sqrt};
use crate::numeric::{mean, pairwise_sum, variance};
use crate::sample::{row_rng, SampleMatrix};

pub const DEFAULT_K: usize = 4;
pub const HALF_SAMPLE_SPLITS: usize = 20;
pub const MAX_ASSIGNMENT_SIZE: usize = 2048;
/// Largest mass defect accepted by quadrature.
pub const QUADRATURE_DEFECT_LIMIT: f64 = 1e-3;
/// Largest mass defect accepted when building numerical CDFs.
pub const CDF_DEFECT_LIMIT: f64 = 1e-8;
const DUPLICATE_LIMIT: f64 = 0.01;
const JITTER_SCALE: f64 = 1e-12;
const JITTER_SALT: u64 = 0x6a09_e667_f3bc_c908;
const SPLIT_SALT: u64 = 0xbb67_ae85_84ca_a73b;

/// A value with a standard error and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub method: String,
    /// Seed of the samples, `None` for deterministic quadrature.
    pub seed: Option<u64>,
    /// Sample count, or number of grid cells for quadrature.
    pub count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimateWithError {
    pub const CSV_HEADER: &'static str = "value,std_error,method,seed,count";

    /// CSV row; `unit` divides value and error (1 for nats, ln 2 for bits).
    pub fn csv_row(&self, unit: f64) -> String {
        format!(
            "{},{},{},{},{}",
            self.value / unit,
            self.std_error / unit,
            self.method,
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.count
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        writeln!(out, "{}", self.csv_row(1.0))
    }

    /// `|self - other|` in units of the combined standard error.
    pub fn z_score(&self, other: f64, other_se: f64) -> f64 {
        let se = (self.std_error.powi(2) + other_se.powi(2)).sqrt();
        (self.value - other).abs() / se
    }

    /// Same estimate with value and error divided by `n`.
    pub fn per_coordinate(&self, n: usize) -> Self {
        Self {
            value: self.value / n as f64,
            std_error: self.std_error / n as f64,
            ..self.clone()
        }
    }
}

fn check_box(bounds: &[(f64, f64)], grid: usize, dim: usize) -> Result<()> {
    if dim > 2 {
        return Err(Error::Unsupported(format!("quadrature needs n <= 2, got {dim}")));
    }
    if bounds.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bounds.len(),
        });
    }
    if grid == 0 {
        return Err(invalid("grid", "must be positive"));
    }
    if bounds.iter().any(|(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite()) {
        return Err(invalid("box", "each axis needs finite lo < hi"));
    }
    Ok(())
}

/// Midpoint rule over the tensor grid: returns `(∫f, ∫term(f(x), ln f(x), x))`.
fn midpoint_integrals<D, F>(density: &D, bounds: &[(f64, f64)], grid: usize, term: F) -> (f64, f64)
where
    D: Density + ?Sized,
    F: Fn(f64, f64, &[f64]) -> f64 + Sync,
{
    let h: Vec<f64> = bounds.iter().map(|(lo, hi)| (hi - lo) / grid as f64).collect();
    let cell: f64 = h.iter().product();
    let mid = |axis: usize, i: usize| bounds[axis].0 + (i as f64 + 0.5) * h[axis];
    let inner = if bounds.len() == 2 { grid } else { 1 };
    let rows: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let mut x = vec![mid(0, i); bounds.len()];
            let mut mass = Vec::with_capacity(inner);
            let mut acc = Vec::with_capacity(inner);
            for j in 0..inner {
                if bounds.len() == 2 {
                    x[1] = mid(1, j);
                }
                let lf = density.ln_pdf(&x);
                let f = lf.exp();
                mass.push(f);
                acc.push(if f > 0.0 { term(f, lf, &x) } else { 0.0 });
            }
            (pairwise_sum(&mass), pairwise_sum(&acc))
        })
        .collect();
    let mass: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let acc: Vec<f64> = rows.iter().map(|r| r.1).collect();
    (pairwise_sum(&mass) * cell, pairwise_sum(&acc) * cell)
}

fn defect_check(mass: f64, limit: f64) -> Result<f64> {
    let defect = (1.0 - mass).abs();
    if !(defect <= limit) {
        return Err(Error::MassDefect { defect, limit });
    }
    Ok(defect)
}

/// `-∫ f ln f` by the midpoint rule on a `grid`-per-axis tensor grid over
/// `bounds` (n ≤ 2). The standard error is a bound derived from the mass
/// defect of the box.
pub fn entropy_quadrature<D: Density + ?Sized>(
    density: &D,
    bounds: &[(f64, f64)],
    grid: usize,
) -> Result<EstimateWithError> {
    check_box(bounds, grid, density.dim())?;
    let (mass, neg) = midpoint_integrals(density, bounds, grid, |f, lf, _| -f * lf);
    let defect = defect_check(mass, QUADRATURE_DEFECT_LIMIT)?;
    Ok(EstimateWithError {
        value: neg,
        std_error: defect * (1.0 + neg.abs()),
        method: "entropy_quadrature".into(),
        seed: None,
        count: grid.pow(bounds.len() as u32),
        warnings: Vec::new(),
    })
}

/// `∫ f ln(f/g)` by the midpoint rule, same conventions as
/// [`entropy_quadrature`].
pub fn kl_quadrature<F, G>(f: &F, g: &G, bounds: &[(f64, f64)], grid: usize) -> Result<EstimateWithError>
where
    F: Density + ?Sized,
    G: Density + ?Sized,
{
    check_box(bounds, grid, f.dim())?;
    if g.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let (mass, kl) = midpoint_integrals(f, bounds, grid, |fx, lf, x| fx * (lf - g.ln_pdf(x)));
    let defect = defect_check(mass, QUADRATURE_DEFECT_LIMIT)?;
    Ok(EstimateWithError {
        value: kl,
        std_error: defect * (1.0 + kl.abs()),
        method: "kl_quadrature".into(),
        seed: None,
        count: grid.pow(bounds.len() as u32),
        warnings: Vec::new(),
    })
}

/// Kozachenko–Leonenko estimate without a standard error:
/// `(n/N) Σ ln ρ_k + ln V_n + ψ(N) - ψ(k)`.
pub fn knn_point_estimate(points: &[f64], n: usize, k: usize) -> Result<f64> {
    let count = points.len() / n;
    if count <= k {
        return Err(Error::TooFewSamples {
            got: count,
            needed: k + 1,
        });
    }
    let tree = kdtree::KdTree::build(points, n);
    let ln_rho: Vec<f64> = tree.all_kth_distances(k).into_iter().map(f64::ln).collect();
    if let Some(i) = ln_rho.iter().position(|v| !v.is_finite()) {
        return Err(invalid("samples", format!("sample {i} has {k} or more exact copies")));
    }
    let nf = n as f64;
    let ln_ball = 0.5 * nf * std::f64::consts::PI.ln() - ln_gamma(0.5 * nf + 1.0);
    Ok(nf * mean(&ln_rho) + ln_ball + digamma(count as f64) - digamma(k as f64))
}

fn count_duplicates(samples: &SampleMatrix) -> usize {
    let mut order: Vec<usize> = (0..samples.count()).collect();
    let cmp = |a: &usize, b: &usize| {
        samples
            .row(*a)
            .iter()
            .zip(samples.row(*b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    order.par_sort_unstable_by(cmp);
    order.windows(2).filter(|w| samples.row(w[0]) == samples.row(w[1])).count()
}

/// Nearest-neighbor differential entropy of the law behind `samples`, in
/// nats. Needs at least `50 k` draws. The standard error is the spread of
/// 20 half-sample estimates divided by √2.
///
/// Exact duplicate rows are jittered by uniform noise at `1e-12` relative
/// scale (with a warning); more than 1% duplicates is an error.
pub fn entropy_knn(samples: &SampleMatrix, k: usize) -> Result<EstimateWithError> {
    if k == 0 {
        return Err(invalid("k", "must be positive"));
    }
    let count = samples.count();
    if count < 50 * k {
        return Err(Error::TooFewSamples {
            got: count,
            needed: 50 * k,
        });
    }
    let n = samples.dim();
    let seed = samples.provenance.seed;
    let mut warnings = Vec::new();
    let duplicates = count_duplicates(samples);
    let jittered;
    let points: &[f64] = if duplicates == 0 {
        samples.as_slice()
    } else if duplicates as f64 > DUPLICATE_LIMIT * count as f64 {
        return Err(Error::TooManyDuplicates { duplicates, count });
    } else {
        warnings.push(format!("jittered {count} samples to break {duplicates} duplicate rows"));
        let mut v = samples.as_slice().to_vec();
        v.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let mut rng = row_rng(seed ^ JITTER_SALT, i as u64);
            for x in row {
                *x += JITTER_SCALE * (1.0 + x.abs()) * (rng.random::<f64>() - 0.5);
            }
        });
        jittered = v;
        &jittered
    };

    let value = knn_point_estimate(points, n, k)?;
    let half = count / 2;
    let mut halves = Vec::with_capacity(HALF_SAMPLE_SPLITS);
    for s in 0..HALF_SAMPLE_SPLITS {
        let mut order: Vec<usize> = (0..count).collect();
        order.shuffle(&mut row_rng(seed ^ SPLIT_SALT, s as u64));
        let mut sub = Vec::with_capacity(half * n);
        for &i in &order[..half] {
            sub.extend_from_slice(&points[i * n..(i + 1) * n]);
        }
        halves.push(knn_point_estimate(&sub, n, k)?);
    }
    Ok(EstimateWithError {
        value,
        std_error: (variance(&halves) / 2.0).sqrt(),
        method: format!("entropy_knn(k={k})"),
        seed: Some(seed),
        count,
        warnings,
    })
}

/// Monte Carlo `D(f‖g) = E_f[ln f - ln g]` over draws from `f`.
pub fn kl_monte_carlo<F, G>(f: &F, g: &G, samples_from_f: &SampleMatrix) -> Result<EstimateWithError>
where
    F: Density + ?Sized,
    G: Density + ?Sized,
{
    for d in [f.dim(), g.dim()] {
        if d != samples_from_f.dim() {
            return Err(Error::DimensionMismatch {
                expected: samples_from_f.dim(),
                got: d,
            });
        }
    }
    let count = samples_from_f.count();
    if count < 2 {
        return Err(Error::TooFewSamples { got: count, needed: 2 });
    }
    let ratios: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = samples_from_f.row(i);
            f.ln_pdf(x) - g.ln_pdf(x)
        })
        .collect();
    if let Some(index) = ratios.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFiniteLogRatio { index });
    }
    Ok(EstimateWithError {
        value: mean(&ratios),
        std_error: (variance(&ratios) / count as f64).sqrt(),
        method: "kl_monte_carlo".into(),
        seed: Some(samples_from_f.provenance.seed),
        count,
        warnings: Vec::new(),
    })
}

/// Cell masses of a 1D density on `grid` equal cells of `[lo, hi]`,
/// normalized after the mass-defect check.
fn cell_masses<D: Density + ?Sized>(density: &D, lo: f64, hi: f64, grid: usize) -> Result<Vec<f64>> {
    let h = (hi - lo) / grid as f64;
    let raw: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|i| density.pdf(&[lo + (i as f64 + 0.5) * h]) * h)
        .collect();
    let total = pairwise_sum(&raw);
    defect_check(total, CDF_DEFECT_LIMIT)?;
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// 1D Wasserstein-2 by the quantile coupling
/// `√∫₀¹ (F⁻¹(u) - G⁻¹(u))² du`.
///
/// Both densities are discretized to piecewise-constant densities on a
/// common grid of `grid` cells spanning 40 standard deviations around each
/// mean. Their quantile functions are then piecewise linear and the integral
/// is evaluated exactly over the merged breakpoints.
pub fn w2_quantile_1d<F, G>(f: &F, g: &G, grid: usize) -> Result<f64>
where
    F: Density + ?Sized,
    G: Density + ?Sized,
{
    if f.dim() != 1 || g.dim() != 1 {
        return Err(Error::Unsupported("w2_quantile_1d needs univariate densities".into()));
    }
    if grid < 2 {
        return Err(invalid("grid", "need at least 2 cells"));
    }
    let span = |d: &dyn Fn() -> (f64, f64)| {
        let (m, v) = d();
        let s = 40.0 * v.sqrt();
        (m - s, m + s)
    };
    let (fl, fh) = span(&|| (f.mean()[0], f.covariance()[0]));
    let (gl, gh) = span(&|| (g.mean()[0], g.covariance()[0]));
    let (lo, hi) = (fl.min(gl), fh.max(gh));
    let h = (hi - lo) / grid as f64;
    let p = cell_masses(f, lo, hi, grid)?;
    let q = cell_masses(g, lo, hi, grid)?;

    // Quantile of a piecewise-constant density at level u inside cell i
    // whose mass starts at cumulative level c.
    let quantile = |i: usize, c: f64, mass: f64, u: f64| lo + h * (i as f64 + (u - c) / mass);
    let (mut i, mut j) = (0, 0);
    let (mut cf, mut cg) = (0.0, 0.0);
    let mut u = 0.0;
    let mut pieces = Vec::new();
    loop {
        while i < grid && p[i] == 0.0 {
            i += 1;
        }
        while j < grid && q[j] == 0.0 {
            j += 1;
        }
        if i == grid || j == grid {
            break;
        }
        let (ef, eg) = (cf + p[i], cg + q[j]);
        let u1 = ef.min(eg);
        if u1 > u {
            let d0 = quantile(i, cf, p[i], u) - quantile(j, cg, q[j], u);
            let d1 = quantile(i, cf, p[i], u1) - quantile(j, cg, q[j], u1);
            pieces.push((u1 - u) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0);
        }
        u = u1;
        if ef <= u1 {
            cf = ef;
            i += 1;
        }
        if eg <= u1 {
            cg = eg;
            j += 1;
        }
    }
    Ok(pairwise_sum(&pieces).max(0.0).sqrt())
}

/// `√(‖μ_a - μ_b‖² + tr(Σ_a + Σ_b - 2(Σ_b^{1/2} Σ_a Σ_b^{1/2})^{1/2}))`.
/// Covariances are row-major `n × n`.
pub fn w2_gaussian_closed_form(mean_a: &[f64], cov_a: &[f64], mean_b: &[f64], cov_b: &[f64]) -> Result<f64> {
    let n = mean_a.len();
    if mean_b.len() != n || cov_a.len() != n * n || cov_b.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mean_b.len(),
        });
    }
    let scale = cov_a.iter().chain(cov_b).fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    symmetric_sqrt(n, cov_a, tol)?;
    let root_b = symmetric_sqrt(n, cov_b, tol)?;
    let inner = matmul(n, &matmul(n, &root_b, cov_a), &root_b);
    // symmetrize before the second root
    let inner: Vec<f64> = (0..n * n)
        .map(|e| 0.5 * (inner[e] + inner[(e % n) * n + e / n]))
        .collect();
    let cross = symmetric_sqrt(n, &inner, tol * scale)?;
    let trace: f64 = (0..n).map(|i| cov_a[i * n + i] + cov_b[i * n + i] - 2.0 * cross[i * n + i]).sum();
    let shift: f64 = mean_a.iter().zip(mean_b).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((shift + trace).max(0.0).sqrt())
}

/// Exact W2 between two equal-size empirical measures,
/// `√((1/m) min_π Σ ‖a_i - b_π(i)‖²)`, via the Hungarian method.
pub fn w2_empirical(a: &SampleMatrix, b: &SampleMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.count() != b.count() {
        return Err(Error::CountMismatch(a.count(), b.count()));
    }
    let m = a.count();
    if m == 0 || m > MAX_ASSIGNMENT_SIZE {
        return Err(invalid("count", format!("need 1 <= m <= {MAX_ASSIGNMENT_SIZE}, got {m}")));
    }
    let mut cost = vec![0.0; m * m];
    cost.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let ai = a.row(i);
        for (j, c) in row.iter_mut().enumerate() {
            *c = ai.iter().zip(b.row(j)).map(|(x, y)| (x - y) * (x - y)).sum();
        }
    });
    let pi = assignment::solve(m, &cost);
    let terms: Vec<f64> = pi.iter().enumerate().map(|(i, &j)| cost[i * m + j]).collect();
    Ok((pairwise_sum(&terms) / m as f64).sqrt())
}

/// One rung of the block-entropy ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n: usize,
    /// `h(Xⁿ)/n` estimate.
    pub per_coordinate: EstimateWithError,
}

/// kNN estimates of `h(Xⁿ)/n` for each block length in `ladder`. For a
/// stationary process the sequence is non-increasing toward the entropy
/// rate; no extrapolation is done.
pub fn block_entropy_ladder<S>(sampler: S, ladder: &[usize], k: usize) -> Result<Vec<LadderPoint>>
where
    S: Fn(usize) -> Result<SampleMatrix>,
{
    ladder
        .iter()
        .map(|&n| {
            let samples = sampler(n)?;
            let est = entropy_knn(&samples, k)?;
            Ok(LadderPoint {
                n,
                per_coordinate: est.per_coordinate(n),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Gaussian, GaussianMixture, Logistic};
    use crate::numeric::LN_2PI_E;
    use crate::sample::Provenance;

    const H_UNIT: f64 = 1.418_938_533_204_672_7;

    #[test]
    fn quadrature_examples() {
        let e = entropy_quadrature(&Gaussian::standard(1), &[(-10.0, 10.0)], 4001).unwrap();
        assert!((e.value - H_UNIT).abs() < 1e-7 && e.std_error < 1e-7);
        let e = entropy_quadrature(&Logistic::standard(), &[(-40.0, 40.0)], 8001).unwrap();
        assert!((e.value - 2.0).abs() < 1e-6);
        let sharp = Gaussian::univariate(0.0, 1e-4).unwrap();
        let e = entropy_quadrature(&sharp, &[(-0.1, 0.1)], 4001).unwrap();
        let by_hand = 0.5 * (LN_2PI_E + 1e-4f64.ln());
        assert!((e.value - by_hand).abs() < 1e-7);
        assert!((by_hand + 3.1863).abs() < 1e-4);
    }

    #[test]
    fn quadrature_2d_and_rejections() {
        let g = Gaussian::new(vec![0.0, 0.0], vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let e = entropy_quadrature(&g, &[(-10.0, 10.0), (-10.0, 10.0)], 600).unwrap();
        assert!((e.value - g.entropy()).abs() < 1e-6);
        assert!(matches!(
            entropy_quadrature(&Gaussian::standard(1), &[(-1.0, 1.0)], 100),
            Err(Error::MassDefect { .. })
        ));
        assert!(entropy_quadrature(&Gaussian::standard(3), &[(-1.0, 1.0); 3], 10).is_err());
    }

    #[test]
    fn kl_quadrature_gaussian_shift() {
        let f = Gaussian::standard(1);
        let g = Gaussian::univariate(1.0, 1.0).unwrap();
        let kl = kl_quadrature(&f, &g, &[(-12.0, 12.0)], 4001).unwrap();
        assert!((kl.value - 0.5).abs() < 1e-9);
    }

    fn draws(d: &dyn Density, count: usize, seed: u64) -> SampleMatrix {
        d.sample(count, seed)
    }

    #[test]
    fn knn_examples() {
        let x = draws(&Gaussian::standard(1), 100_000, 1);
        let e = entropy_knn(&x, DEFAULT_K).unwrap();
        assert!((e.value - H_UNIT).abs() < 0.01, "{e:?}");
        assert!(e.std_error > 0.0 && e.std_error < 0.01);

        let doubled = x.map(|v| 2.0 * v);
        let e2 = entropy_knn(&doubled, DEFAULT_K).unwrap();
        assert!((e2.value - e.value - 2f64.ln()).abs() < 0.01);

        let x4 = draws(&Gaussian::standard(4), 100_000, 2);
        let e4 = entropy_knn(&x4, DEFAULT_K).unwrap();
        assert!((e4.value - 4.0 * H_UNIT).abs() < 0.05, "{e4:?}");
    }

    #[test]
    fn knn_sample_floor_and_duplicates() {
        let x = draws(&Gaussian::standard(1), 150, 1);
        assert!(matches!(entropy_knn(&x, 4), Err(Error::TooFewSamples { .. })));

        let base = draws(&Gaussian::standard(1), 10_000, 3);
        let mut v = base.as_slice().to_vec();
        for i in 0..50 {
            v[2 * i + 1] = v[2 * i];
        }
        let few = SampleMatrix::new(1, v.clone(), base.provenance.clone()).unwrap();
        let e = entropy_knn(&few, 4).unwrap();
        assert_eq!(e.warnings.len(), 1);
        assert!((e.value - H_UNIT).abs() < 0.05);
        for i in 0..500 {
            v[2 * i + 1] = v[2 * i];
        }
        let many = SampleMatrix::new(1, v, base.provenance.clone()).unwrap();
        assert!(matches!(entropy_knn(&many, 4), Err(Error::TooManyDuplicates { .. })));
    }

    #[test]
    fn knn_error_shrinks_along_sample_ladder() {
        // Root mean square error over replicates, per dimension.
        for n in [1usize, 2, 4] {
            let g = Gaussian::standard(n);
            let truth = n as f64 * H_UNIT;
            let rmse: Vec<f64> = [1_000usize, 10_000, 100_000]
                .iter()
                .map(|&count| {
                    let sq: Vec<f64> = (0..6)
                        .map(|r| {
                            let s = g.sample(count, 100 + r);
                            (knn_point_estimate(s.as_slice(), n, DEFAULT_K).unwrap() - truth).powi(2)
                        })
                        .collect();
                    mean(&sq).sqrt()
                })
                .collect();
            assert!(rmse[0] > rmse[1] && rmse[1] > rmse[2], "n={n}: {rmse:?}");
        }
    }

    #[test]
    fn kl_examples() {
        let f = Gaussian::standard(1);
        let x = f.sample(100_000, 4);
        let same = kl_monte_carlo(&f, &f, &x).unwrap();
        assert_eq!(same.value, 0.0);

        let g = Gaussian::univariate(1.0, 1.0).unwrap();
        let kl = kl_monte_carlo(&f, &g, &x).unwrap();
        assert!((kl.value - 0.5).abs() < 3.0 * kl.std_error, "{kl:?}");

        let mix = GaussianMixture::univariate(&[-2.0, 2.0], 1.0).unwrap();
        let matched = Gaussian::moment_matched(&mix).unwrap();
        let kl = kl_monte_carlo(&mix, &matched, &mix.sample(100_000, 5)).unwrap();
        let hf = entropy_quadrature(&mix, &[(-15.0, 15.0)], 8001).unwrap();
        let hg = entropy_quadrature(&matched, &[(-25.0, 25.0)], 8001).unwrap();
        assert!(kl.value > 0.0);
        assert!(kl.z_score(hg.value - hf.value, hf.std_error + hg.std_error) < 3.0);
    }

    #[test]
    fn kl_rejects_nonfinite_ratio() {
        let f = Gaussian::standard(1);
        let g = Gaussian::univariate(0.0, 1e-300).unwrap();
        let x = SampleMatrix::new(1, vec![0.0, 1e10], Provenance { method: "t".into(), seed: 0 }).unwrap();
        assert!(matches!(kl_monte_carlo(&f, &g, &x), Err(Error::NonFiniteLogRatio { index: 1 })));
    }

    #[test]
    fn w2_quantile_examples() {
        let f = Gaussian::standard(1);
        assert!(w2_quantile_1d(&f, &f, 100_000).unwrap() < 1e-8);
        let shifted = Gaussian::univariate(1.0, 1.0).unwrap();
        assert!((w2_quantile_1d(&f, &shifted, 200_000).unwrap() - 1.0).abs() < 1e-6);
        let wide = Gaussian::univariate(0.0, 4.0).unwrap();
        assert!((w2_quantile_1d(&f, &wide, 200_000).unwrap() - 1.0).abs() < 1e-6);
        assert!(w2_quantile_1d(&Gaussian::standard(2), &Gaussian::standard(2), 10).is_err());
    }

    #[test]
    fn w2_closed_form_examples() {
        let z = [0.0, 0.0];
        let eye = [1.0, 0.0, 0.0, 1.0];
        assert!(w2_gaussian_closed_form(&z, &eye, &z, &eye).unwrap() < 1e-12);
        let four = [4.0, 0.0, 0.0, 4.0];
        assert!((w2_gaussian_closed_form(&z, &eye, &z, &four).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let c = [2.0, 0.7, 0.7, 1.0];
        let d = [1.0, -0.3, -0.3, 0.5];
        let ab = w2_gaussian_closed_form(&z, &c, &[1.0, 0.0], &d).unwrap();
        let ba = w2_gaussian_closed_form(&[1.0, 0.0], &d, &z, &c).unwrap();
        assert!((ab - ba).abs() < 1e-10);
        assert!(w2_gaussian_closed_form(&z, &[1.0, 2.0, 2.0, 1.0], &z, &eye).is_err());
        // 1D agreement with the quantile oracle
        for (ma, va, mb, vb) in [(0.0, 1.0, 1.0, 1.0), (0.0, 1.0, 0.0, 4.0), (0.5, 2.0, -1.0, 0.3)] {
            let cf = w2_gaussian_closed_form(&[ma], &[va], &[mb], &[vb]).unwrap();
            let q = w2_quantile_1d(
                &Gaussian::univariate(ma, va).unwrap(),
                &Gaussian::univariate(mb, vb).unwrap(),
                200_000,
            )
            .unwrap();
            assert!((cf - q).abs() < 1e-6, "{cf} vs {q}");
        }
    }

    #[test]
    fn w2_empirical_examples() {
        let a = Gaussian::standard(2).sample(64, 7);
        assert_eq!(w2_empirical(&a, &a).unwrap(), 0.0);

        // 1D: the optimal assignment is the sorted pairing.
        let x = Gaussian::standard(1).sample(300, 8);
        let y = Logistic::standard().sample(300, 9);
        let mut xs = x.column(0);
        let mut ys = y.column(0);
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let sorted: Vec<f64> = xs.iter().zip(&ys).map(|(p, q)| (p - q) * (p - q)).collect();
        let by_sort = (pairwise_sum(&sorted) / 300.0).sqrt();
        assert!((w2_empirical(&x, &y).unwrap() - by_sort).abs() < 1e-12);

        let p = Gaussian::standard(2).sample(512, 10);
        let q = Gaussian::isotropic(vec![3.0, 0.0], 1.0).unwrap().sample(512, 11);
        assert!((w2_empirical(&p, &q).unwrap() - 3.0).abs() < 0.15);

        let short = Gaussian::standard(2).sample(10, 1);
        assert!(matches!(w2_empirical(&p, &short), Err(Error::CountMismatch(..))));
    }

    #[test]
    fn estimators_are_deterministic() {
        let x = Gaussian::standard(2).sample(5_000, 21);
        assert_eq!(entropy_knn(&x, 4).unwrap(), entropy_knn(&x, 4).unwrap());
        let f = Gaussian::standard(2);
        let g = Gaussian::isotropic(vec![0.5, 0.0], 2.0).unwrap();
        assert_eq!(kl_monte_carlo(&f, &g, &x).unwrap(), kl_monte_carlo(&f, &g, &x).unwrap());
    }

    #[test]
    fn csv_row_layout() {
        let e = EstimateWithError {
            value: 1.5,
            std_error: 0.25,
            method: "m".into(),
            seed: Some(3),
            count: 10,
            warnings: vec![],
        };
        assert_eq!(e.csv_row(1.0), "1.5,0.25,m,3,10");
        assert_eq!(e.per_coordinate(2).value, 0.75);
    }
}
