//! Entropy gap to the moment-matched Gaussian against the W2 bound, for
//! every one-dimensional corpus density.

use erb::corpus::density_corpus;
use erb::experiment::prop1_check;

fn main() -> erb::Result<()> {
    let entries: Vec<_> = density_corpus().into_iter().filter(|d| !d.is_gaussian).collect();
    println!("{:<32} {:>9} {:>9} {:>9}", "density", "gap", "W2", "bound");
    for r in prop1_check(&entries, 200_000)? {
        println!("{:<32} {:>9.5} {:>9.5} {:>9.5}", r.name, r.gap, r.w2, r.delta);
    }
    Ok(())
}
