//! Finite-`n` Gaussian quantities built on the Toeplitz covariance
//! `[R]_{kl} = r(k - l)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cholesky};
use crate::numeric::LN_2PI_E;
use crate::regularity::{C2Growth, RegularityConstants};
use crate::sample::{row_rng, Provenance, SampleMatrix};
use crate::spectra::{psd_extrema, AutocovarianceSpec, SpectralDensity};

/// Symmetric Toeplitz covariance of an `n`-block, held by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzCovariance {
    first_row: Vec<f64>,
}

impl ToeplitzCovariance {
    pub fn from_first_row(first_row: Vec<f64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(crate::error::invalid("n", "must be at least 1"));
        }
        Ok(Self { first_row })
    }

    pub fn dim(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.first_row[k.abs_diff(l)]
    }

    /// Row-major dense realization.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                out.push(self.entry(k, l));
            }
        }
        out
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(self.dim(), |i, j| self.entry(i, j))
    }
}

/// Dense `n × n` Toeplitz covariance with entries `r(k - l)`.
pub fn build_covariance(spec: &AutocovarianceSpec, n: usize) -> Result<ToeplitzCovariance> {
    ToeplitzCovariance::from_first_row((0..n).map(|l| spec.lag(l as i64)).collect())
}

/// `(1/2n) ln((2πe)^n det R)` in nats, via the Cholesky log-determinant.
pub fn gaussian_entropy_per_coordinate(cov: &ToeplitzCovariance) -> Result<f64> {
    let chol = cov.cholesky()?;
    Ok(0.5 * (LN_2PI_E + chol.log_det() / cov.dim() as f64))
}

/// `ln det R` by the Levinson–Durbin recursion, `O(n²)`. An independent
/// route to the Cholesky log-determinant that exercises the Toeplitz structure.
pub fn levinson_log_det(cov: &ToeplitzCovariance) -> Result<f64> {
    let r = cov.first_row();
    let n = r.len();
    let mut err = r[0];
    if !(err > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 0, value: err });
    }
    let mut log_det = err.ln();
    let mut a = vec![0.0; n];
    let mut prev = vec![0.0; n];
    for k in 1..n {
        let acc: f64 = (1..k).map(|j| a[j] * r[k - j]).sum();
        let kappa = (r[k] - acc) / err;
        prev[..k].copy_from_slice(&a[..k]);
        a[k] = kappa;
        for j in 1..k {
            a[j] = prev[j] - kappa * prev[k - j];
        }
        err *= 1.0 - kappa * kappa;
        if !(err > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: k, value: err });
        }
        log_det += err.ln();
    }
    Ok(log_det)
}

/// Smallest and largest eigenvalue by a dense symmetric eigensolver.
pub fn eigen_extrema(cov: &ToeplitzCovariance) -> (f64, f64) {
    let ev = symmetric_eigenvalues(cov.dim(), &cov.to_dense());
    (ev[0], ev[ev.len() - 1])
}

pub fn min_eigenvalue(cov: &ToeplitzCovariance) -> f64 {
    eigen_extrema(cov).0
}

/// Regularity of the zero-mean Gaussian with this covariance:
/// `‖∇ ln f(x)‖ = ‖R⁻¹x‖ ≤ λ_min⁻¹ ‖x‖`, so `c1 = 1/λ_min`, `c2 = 0`.
pub fn gaussian_regularity_c1(cov: &ToeplitzCovariance) -> Result<RegularityConstants> {
    // Factorization doubles as the positive-definiteness check.
    cov.cholesky()?;
    let lambda = min_eigenvalue(cov);
    if !(lambda > 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: lambda,
        });
    }
    RegularityConstants::new(1.0 / lambda, 0.0, C2Growth::Constant)
}

/// Block-size independent constant `c1 = 1/inf S(f)`, valid for every `n`
/// because `λ_min(R⁽ⁿ⁾) ≥ inf S`.
pub fn process_regularity_c1(spectrum: &SpectralDensity) -> Result<RegularityConstants> {
    let (lo, _) = psd_extrema(spectrum);
    if !(lo > 0.0) {
        return Err(Error::DivergentSpectrum {
            bin: spectrum.values().iter().position(|v| *v <= 0.0).unwrap_or(0),
            frequency: 0.0,
        });
    }
    RegularityConstants::new(1.0 / lo, 0.0, C2Growth::Constant)
}

/// `count` draws `L z`, `z ~ N(0, I)`, from the Cholesky factor of `cov`.
/// Draw `i` uses ChaCha stream `i` under `seed`, so the output does not
/// depend on thread count.
pub fn cholesky_sampler(cov: &ToeplitzCovariance, count: usize, seed: u64) -> Result<SampleMatrix> {
    let chol = cov.cholesky()?;
    Ok(sample_with_factor(&chol, count, seed, "cholesky"))
}

pub(crate) fn sample_with_factor(chol: &Cholesky, count: usize, seed: u64, method: &str) -> SampleMatrix {
    let n = chol.dim();
    let mut values = vec![0.0; n * count];
    values.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        let mut rng = row_rng(seed, i as u64);
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        chol.mul_lower(&z, out);
    });
    SampleMatrix::new(
        n,
        values,
        Provenance {
            method: method.into(),
            seed,
        },
    )
    .expect("finite Gaussian draws")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::szego_entropy_rate;

    fn ar1() -> AutocovarianceSpec {
        AutocovarianceSpec::ar1(1.0, 0.5).unwrap()
    }

    #[test]
    fn builds_toeplitz_entries() {
        let w = build_covariance(&AutocovarianceSpec::white(2.0).unwrap(), 3).unwrap();
        assert_eq!(w.to_dense(), vec![2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
        let a = build_covariance(&ar1(), 3).unwrap();
        assert_eq!(a.to_dense(), vec![1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0]);
        let t = build_covariance(&AutocovarianceSpec::tabulated(vec![1.0, 0.9]).unwrap(), 3).unwrap();
        assert_eq!(t.to_dense(), vec![1.0, 0.9, 0.0, 0.9, 1.0, 0.9, 0.0, 0.9, 1.0]);
    }

    #[test]
    fn entropy_small_cases() {
        let id = build_covariance(&AutocovarianceSpec::white(1.0).unwrap(), 3).unwrap();
        assert!((gaussian_entropy_per_coordinate(&id).unwrap() - 1.418_938_533_204_672_7).abs() < 1e-12);
        // det [[1, .5], [.5, 1]] = 0.75
        let two = build_covariance(&ar1(), 2).unwrap();
        let by_hand = 0.25 * ((2.0 * std::f64::consts::PI * std::f64::consts::E).powi(2) * 0.75).ln();
        assert!((gaussian_entropy_per_coordinate(&two).unwrap() - by_hand).abs() < 1e-12);
        assert!((by_hand - 1.3470).abs() < 1e-4);
    }

    #[test]
    fn converges_to_szego_limit() {
        let s = SpectralDensity::from_autocovariance(&ar1(), 4096).unwrap();
        let rate = szego_entropy_rate(&s).unwrap();
        let h = gaussian_entropy_per_coordinate(&build_covariance(&ar1(), 1024).unwrap()).unwrap();
        assert!((h - rate).abs() <= 3e-4);
    }

    #[test]
    fn convergence_is_monotone_on_ladder() {
        for spec in [ar1(), AutocovarianceSpec::ma(vec![1.0, 0.5], 1.0).unwrap()] {
            let rate = szego_entropy_rate(&SpectralDensity::from_autocovariance(&spec, 4096).unwrap())
                .unwrap();
            let gaps: Vec<f64> = [16, 64, 256, 1024]
                .iter()
                .map(|&n| {
                    (gaussian_entropy_per_coordinate(&build_covariance(&spec, n).unwrap()).unwrap() - rate)
                        .abs()
                })
                .collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        }
    }

    #[test]
    fn levinson_agrees_with_cholesky() {
        for spec in [ar1(), AutocovarianceSpec::ma(vec![1.0, -0.7, 0.2], 2.0).unwrap()] {
            for n in [1, 2, 17, 128, 512] {
                let cov = build_covariance(&spec, n).unwrap();
                let a = cov.cholesky().unwrap().log_det();
                let b = levinson_log_det(&cov).unwrap();
                assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalue_cases() {
        let d = build_covariance(&AutocovarianceSpec::white(2.0).unwrap(), 3).unwrap();
        assert!((min_eigenvalue(&d) - 2.0).abs() < 1e-14);
        let degenerate = build_covariance(&AutocovarianceSpec::tabulated(vec![1.0, 1.0]).unwrap(), 2).unwrap();
        assert!(min_eigenvalue(&degenerate).abs() < 1e-12);
        let lam = min_eigenvalue(&build_covariance(&ar1(), 64).unwrap());
        assert!(lam > 1.0 / 3.0 && lam < 1.0);
    }

    #[test]
    fn min_eigenvalue_matches_inertia_bisection() {
        // Independent route: the number of negative LDL^T pivots of A - mu I
        // counts the eigenvalues below mu.
        let cov = build_covariance(&ar1(), 64).unwrap();
        let a = cov.to_dense();
        let below = |mu: f64| {
            let n = 64;
            let mut l = vec![0.0; n * n];
            let mut d = vec![0.0; n];
            let mut neg = 0;
            for j in 0..n {
                let mut dj = a[j * n + j] - mu;
                for k in 0..j {
                    dj -= l[j * n + k] * l[j * n + k] * d[k];
                }
                d[j] = dj;
                if dj < 0.0 {
                    neg += 1;
                }
                for i in j + 1..n {
                    let mut v = a[i * n + j];
                    for k in 0..j {
                        v -= l[i * n + k] * l[j * n + k] * d[k];
                    }
                    l[i * n + j] = v / dj;
                }
            }
            neg
        };
        let (mut lo, mut hi) = (0.0, 0.9);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let dense = min_eigenvalue(&cov);
        let bisected = 0.5 * (lo + hi);
        assert!((bisected - dense).abs() <= 1e-8 * dense, "{bisected} vs {dense}");
    }

    #[test]
    fn szego_bracket_holds() {
        for spec in [ar1(), AutocovarianceSpec::ma(vec![1.0, 0.5], 1.0).unwrap()] {
            let (lo, hi) = psd_extrema(&SpectralDensity::from_autocovariance(&spec, 4096).unwrap());
            for n in [2, 8, 64, 256] {
                let (emin, emax) = eigen_extrema(&build_covariance(&spec, n).unwrap());
                assert!(emin >= lo - 1e-8 && emax <= hi + 1e-8, "n={n}");
            }
        }
    }

    #[test]
    fn regularity_constants() {
        let id = build_covariance(&AutocovarianceSpec::white(1.0).unwrap(), 4).unwrap();
        let c = gaussian_regularity_c1(&id).unwrap();
        assert!((c.c1 - 1.0).abs() < 1e-12 && c.c2 == 0.0);
        let s = SpectralDensity::from_autocovariance(&ar1(), 256).unwrap();
        let process = process_regularity_c1(&s).unwrap();
        assert!((process.c1 - 3.0).abs() < 1e-9);
        let per_n = gaussian_regularity_c1(&build_covariance(&ar1(), 8).unwrap()).unwrap();
        assert!(per_n.c1 < 3.0);
        let singular = build_covariance(&AutocovarianceSpec::tabulated(vec![1.0, 1.0]).unwrap(), 2).unwrap();
        assert!(gaussian_regularity_c1(&singular).is_err());
    }

    #[test]
    fn sampler_moments() {
        let one = build_covariance(&AutocovarianceSpec::white(1.0).unwrap(), 1).unwrap();
        let s = cholesky_sampler(&one, 100_000, 7).unwrap();
        let (var, se) = s.covariance_with_error(0, 0);
        assert!((var - 1.0).abs() < 3.0 * se, "{var} ± {se}");

        let two = build_covariance(&ar1(), 2).unwrap();
        let s = cholesky_sampler(&two, 100_000, 11).unwrap();
        let (c, se) = s.covariance_with_error(0, 1);
        assert!((c - 0.5).abs() < 3.0 * se, "{c} ± {se}");
    }

    #[test]
    fn sampler_covariance_within_five_se() {
        let cov = build_covariance(&ar1(), 4).unwrap();
        let s = cholesky_sampler(&cov, 100_000, 3).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let (c, se) = s.covariance_with_error(a, b);
                assert!((c - cov.entry(a, b)).abs() < 5.0 * se, "({a},{b})");
            }
        }
    }

    #[test]
    fn sampler_edge_cases() {
        let cov = build_covariance(&ar1(), 3).unwrap();
        let empty = cholesky_sampler(&cov, 0, 1).unwrap();
        assert!(empty.is_empty());
        assert_eq!(cholesky_sampler(&cov, 50, 9).unwrap(), cholesky_sampler(&cov, 50, 9).unwrap());
        let bad = build_covariance(&AutocovarianceSpec::tabulated(vec![1.0, 1.0]).unwrap(), 2).unwrap();
        assert!(matches!(
            cholesky_sampler(&bad, 10, 1),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }
}
