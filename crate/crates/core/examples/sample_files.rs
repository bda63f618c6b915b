//! Drawing block samples of a process and round-tripping them through the
//! binary sample format.

use std::io::Cursor;

use erb::sample::SampleMatrix;
use erb::simulate::{model_covariance, sample_path, ProcessModel};
use erb::spectra::AutocovarianceSpec;

fn main() -> erb::Result<()> {
    let model = ProcessModel::product_noise(AutocovarianceSpec::ar1(1.0, 0.8)?, AutocovarianceSpec::white(1.0)?, 0.5);
    let samples = sample_path(&model, 4, 10_000, 99)?;
    println!("{} rows of dimension {}, {:?}", samples.count(), samples.dim(), samples.provenance);

    let cov = model_covariance(&model, 4)?;
    for lag in 0..4 {
        let (est, se) = samples.covariance_with_error(0, lag);
        println!("r({lag}): model {:.4}, sample {est:.4} ± {se:.4}", cov.entry(0, lag));
    }

    let mut buf = Vec::new();
    samples.write_binary(&mut buf)?;
    let back = SampleMatrix::read_binary(Cursor::new(&buf), samples.provenance.clone())?;
    println!("binary: {} bytes, identical after reading back: {}", buf.len(), back == samples);

    let mut csv = Vec::new();
    samples.select_rows(&[0, 1, 2]).write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}
