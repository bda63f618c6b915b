//! Per-coordinate entropy of Gaussian blocks approaching the spectral rate.

use erb::numeric::LN_2PI_E;
use erb::spectra::{psd_extrema, szego_entropy_rate, AutocovarianceSpec, SpectralDensity};
use erb::toeplitz::{build_covariance, gaussian_entropy_per_coordinate, levinson_log_det, min_eigenvalue};

fn main() -> erb::Result<()> {
    let spec = AutocovarianceSpec::ar1(1.0, 0.5)?;
    let s = SpectralDensity::from_autocovariance(&spec, 4096)?;
    let rate = szego_entropy_rate(&s)?;
    let (lo, hi) = psd_extrema(&s);
    println!("{}: rate {rate:.10} nats, closed form {:.10}", spec.label(), 0.5 * (LN_2PI_E + 0.75f64.ln()));
    println!("S ranges over [{lo:.4}, {hi:.4}]");

    println!("{:>6} {:>14} {:>12} {:>12}", "n", "h_n/n", "excess", "min eig");
    for n in [1, 2, 4, 16, 64, 256, 1024] {
        let cov = build_covariance(&spec, n)?;
        let h = gaussian_entropy_per_coordinate(&cov)?;
        println!("{n:>6} {h:>14.10} {:>12.3e} {:>12.6}", h - rate, min_eigenvalue(&cov));
    }

    // Levinson and Cholesky agree on the log-determinant
    let cov = build_covariance(&spec, 512)?;
    let chol = cov.cholesky()?.log_det();
    println!("log det at n=512: levinson {:.10}, cholesky {chol:.10}", levinson_log_det(&cov)?);
    Ok(())
}
