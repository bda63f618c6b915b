//! kNN block-entropy estimates between the Gaussian upper bound and the
//! regularity lower bound.

use erb::estimators::DEFAULT_K;
use erb::experiment::sandwich;
use erb::simulate::ProcessModel;
use erb::spectra::AutocovarianceSpec;

fn main() -> erb::Result<()> {
    let flat = AutocovarianceSpec::white(1.0)?;
    let models = [
        ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5)?),
        ProcessModel::product_noise(flat.clone(), flat, 1.0),
    ];
    for model in &models {
        println!("{}", model.label());
        for r in sandwich(model, &[1, 2, 4], 20_000, DEFAULT_K, 11, 0.05)? {
            println!(
                "  n={} {:>9.4} <= {:.4} ± {:.4} <= {:.4}",
                r.n, r.bounds.lower_nats, r.estimate.value, r.estimate.std_error, r.bounds.upper_nats
            );
        }
    }
    Ok(())
}
