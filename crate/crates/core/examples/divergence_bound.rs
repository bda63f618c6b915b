//! Monte Carlo divergence from Gaussianity for the two-point product model,
//! next to the regularity-based bound.

use erb::corpus::tractable_models;
use erb::experiment::theorem1_check;

fn main() -> erb::Result<()> {
    for model in tractable_models() {
        println!("{}", model.label());
        let c = model.regularity_constants(1)?;
        println!("  c1 = {:.4}, c2 = {}", c.c1, c.growth_label());
        for r in theorem1_check(&model, &[1, 2, 4, 8], 20_000, 7)? {
            println!(
                "  n={:<2} D/n = {:.5} ± {:.5}   bound {:.4}   {}",
                r.n,
                r.kl_per_n.value,
                r.kl_per_n.std_error,
                r.bound,
                if r.pass { "ok" } else { "VIOLATED" }
            );
        }
    }
    Ok(())
}
