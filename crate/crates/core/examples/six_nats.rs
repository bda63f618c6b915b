//! Rate bounds for `Y = H·X + Z` with white `H`, `X` as the noise grows.
//! The gap between the bounds settles just above six nats.

use erb::experiment::six_nats_sweep;
use erb::spectra::AutocovarianceSpec;

fn main() -> erb::Result<()> {
    let flat = AutocovarianceSpec::white(1.0)?;
    let levels = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6];
    println!("{:>10} {:>12} {:>12} {:>10}", "σ_Z²", "lower", "upper", "gap");
    for row in six_nats_sweep(&flat, &flat, &levels, 4096)? {
        let r = &row.report;
        println!(
            "{:>10} {:>12.6} {:>12.6} {:>10.6}",
            row.noise_variance,
            r.lower_nats,
            r.upper_nats,
            r.gap()
        );
    }
    Ok(())
}
