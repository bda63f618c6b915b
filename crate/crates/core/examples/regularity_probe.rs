//! Probing `‖∇ ln f(x)‖ ≤ c1‖x‖ + c2` and log-concavity on a few densities.

use erb::density::{Gaussian, GaussianMixture, Logistic};
use erb::regularity::{log_concavity_probe, prop2_constants, verify_regularity, ProbePlan, RegularityConstants};

fn main() -> erb::Result<()> {
    let plan = ProbePlan::new(2000, 3);

    let logistic = Logistic::standard();
    let r = verify_regularity(&logistic, &RegularityConstants::constant(0.01, 1.0)?, &plan)?;
    println!("logistic (0.01, 1): pass={} worst margin {:.3e}", r.pass, r.worst_margin);

    // ±1 smoothed by N(0, 0.5)
    let mix = GaussianMixture::univariate(&[-1.0, 1.0], 0.5)?;
    let c = prop2_constants(0.5, 1.0)?;
    let r = verify_regularity(&mix, &c, &plan)?;
    println!("two-point mixture ({:.1}, {:.1}): pass={} worst margin {:.3e}", c.c1, c.c2, r.pass, r.worst_margin);
    let concave = log_concavity_probe(&mix, 2000, 3)?;
    println!("  log-concave on probes: {} ({} violations)", concave.pass, concave.violations);

    // too small a slope for the standard Gaussian
    let r = verify_regularity(&Gaussian::standard(2), &RegularityConstants::constant(0.5, 0.0)?, &plan)?;
    println!("gaussian (0.5, 0): pass={} counterexample {:.3?}", r.pass, r.argmin_probe);
    println!("{}", r.to_json());
    Ok(())
}
