//! Independent estimators cross-checked: W2 three ways and divergence by
//! Monte Carlo against quadrature.

use erb::density::{Density, Gaussian, Logistic};
use erb::estimators::{
    entropy_knn, entropy_quadrature, kl_monte_carlo, kl_quadrature, w2_empirical, w2_gaussian_closed_form,
    w2_quantile_1d,
};

fn main() -> erb::Result<()> {
    let a = Gaussian::univariate(0.5, 2.0)?;
    let b = Gaussian::univariate(-1.0, 0.3)?;
    println!("W2 quantile   {:.8}", w2_quantile_1d(&a, &b, 200_000)?);
    println!("W2 closed     {:.8}", w2_gaussian_closed_form(&[0.5], &[2.0], &[-1.0], &[0.3])?);
    println!("W2 empirical  {:.4}", w2_empirical(&a.sample(1024, 1), &b.sample(1024, 2))?);

    let f = Logistic::standard();
    let g = Gaussian::moment_matched(&f)?;
    let box1 = [(-40.0, 40.0)];
    let mc = kl_monte_carlo(&f, &g, &f.sample(100_000, 4))?;
    let quad = kl_quadrature(&f, &g, &box1, 8001)?;
    println!("D(logistic ‖ gaussian): MC {:.5} ± {:.5}, quadrature {:.7}", mc.value, mc.std_error, quad.value);

    let h = entropy_quadrature(&f, &box1, 8001)?;
    let knn = entropy_knn(&f.sample(50_000, 5), 4)?;
    println!(
        "h(logistic): closed {:.6}, quadrature {:.6}, kNN {:.4} ± {:.4}",
        f.entropy(),
        h.value,
        knn.value,
        knn.std_error
    );
    Ok(())
}
