//! Built-in test densities and process models with certified regularity
//! constants. Compiled in with the `corpus` feature (on by default); without
//! it every list is empty.

use crate::density::{Density, Gaussian, GaussianMixture, Logistic};
use crate::regularity::RegularityConstants;
use crate::simulate::{model_density, model_psd, ProcessModel};
use crate::spectra::AutocovarianceSpec;
use crate::toeplitz::process_regularity_c1;

/// A test density with constants that hold everywhere, not just on probes.
pub struct CorpusDensity {
    pub name: String,
    pub density: Box<dyn Density>,
    pub constants: RegularityConstants,
    /// How the constants were certified.
    pub provenance: &'static str,
    pub is_gaussian: bool,
    /// Integration box holding all but a negligible part of the mass.
    pub bounds: Vec<(f64, f64)>,
    /// Midpoint cells per axis for quadrature over `bounds`.
    pub quadrature_grid: usize,
}

pub struct CorpusProcess {
    pub name: String,
    pub model: ProcessModel,
    /// Process-level constants (rate bounds).
    pub constants: RegularityConstants,
    pub provenance: &'static str,
}

const CLOSED_FORM: &str = "closed-form gradient";
const MIXTURE: &str = "mixture gradient: posterior mean of component centers";
const SMOOTHING: &str = "Gaussian noise smoothing";
const SPECTRUM: &str = "spectral minimum: c1 = 1/inf S";

/// Two-point mixture `0.5 N(-1, σ²) + 0.5 N(1, σ²)`, i.e. `±1` plus noise.
/// Its score is `-(x - E[±1 | x])/σ²`, so `(1/σ², 1/σ²)` is regular.
fn smoothed_two_point(sigma2: f64) -> CorpusDensity {
    let d = GaussianMixture::univariate(&[-1.0, 1.0], sigma2)
        .expect("valid mixture")
        .with_label(format!("smoothed_two_point(var={sigma2})"));
    let half = 1.0 + 20.0 * sigma2.sqrt();
    CorpusDensity {
        name: d.name(),
        density: Box::new(d),
        constants: RegularityConstants::constant(1.0 / sigma2, 1.0 / sigma2).expect("positive"),
        provenance: MIXTURE,
        is_gaussian: false,
        bounds: vec![(-half, half)],
        quadrature_grid: 8001,
    }
}

fn gaussian_entry(variance: f64) -> CorpusDensity {
    let name = if variance == 1.0 {
        "standard_gaussian".to_string()
    } else {
        format!("scaled_gaussian(var={variance})")
    };
    let half = 12.0 * variance.sqrt();
    CorpusDensity {
        name,
        density: Box::new(Gaussian::univariate(0.0, variance).expect("positive variance")),
        constants: RegularityConstants::constant(1.0 / variance, 0.0).expect("positive"),
        provenance: CLOSED_FORM,
        is_gaussian: true,
        bounds: vec![(-half, half)],
        quadrature_grid: 8001,
    }
}

/// Block density of the two-point product model at `n = 2`, with the noise
/// smoothing constants `(3/σ², 4√(2 r_H(0))/σ²)`.
fn two_point_block(model: ProcessModel) -> CorpusDensity {
    let d = model_density(&model, 2).expect("small block");
    let constants = model.regularity_constants(2).expect("positive noise");
    let half = 8.0 * model.implied_variance().sqrt();
    CorpusDensity {
        name: d.name(),
        density: Box::new(d),
        constants: RegularityConstants::constant(constants.c1, constants.c2_at(2)).expect("valid"),
        provenance: SMOOTHING,
        is_gaussian: false,
        bounds: vec![(-half, half); 2],
        quadrature_grid: 800,
    }
}

/// The tractable two-point product models, as used by the divergence checks.
pub fn tractable_models() -> Vec<ProcessModel> {
    if !cfg!(feature = "corpus") {
        return Vec::new();
    }
    let ar = AutocovarianceSpec::ar1(1.0, 0.9).expect("stationary");
    vec![ProcessModel::two_point(ar.clone(), 0.5), ProcessModel::two_point(ar, 1.0)]
}

pub fn density_corpus() -> Vec<CorpusDensity> {
    if !cfg!(feature = "corpus") {
        return Vec::new();
    }
    let logistic = Logistic::standard();
    let separated = GaussianMixture::univariate(&[-2.0, 2.0], 1.0)
        .expect("valid mixture")
        .with_label("separated_mixture(±2, var=1)");
    let mut out = vec![
        gaussian_entry(1.0),
        gaussian_entry(0.25),
        gaussian_entry(4.0),
        CorpusDensity {
            name: "logistic".into(),
            density: Box::new(logistic),
            // |d/dx ln f| = |tanh(x/2)| ≤ 1 for unit scale; any c1 > 0 works.
            constants: RegularityConstants::constant(0.01, 1.0).expect("valid"),
            provenance: CLOSED_FORM,
            is_gaussian: false,
            bounds: vec![(-40.0, 40.0)],
            quadrature_grid: 8001,
        },
        CorpusDensity {
            name: separated.name(),
            density: Box::new(separated),
            constants: RegularityConstants::constant(1.0, 2.0).expect("valid"),
            provenance: MIXTURE,
            is_gaussian: false,
            bounds: vec![(-15.0, 15.0)],
            quadrature_grid: 8001,
        },
        smoothed_two_point(0.25),
        smoothed_two_point(1.0),
    ];
    out.extend(tractable_models().into_iter().map(two_point_block));
    out
}

pub fn process_corpus() -> Vec<CorpusProcess> {
    if !cfg!(feature = "corpus") {
        return Vec::new();
    }
    let white = AutocovarianceSpec::white(1.0).expect("positive");
    let ar = AutocovarianceSpec::ar1(1.0, 0.5).expect("stationary");
    let mut models = vec![
        ProcessModel::gaussian(white.clone()),
        ProcessModel::gaussian(ar),
        ProcessModel::product_noise(white.clone(), white, 1.0),
    ];
    models.extend(tractable_models());
    models
        .into_iter()
        .map(|model| {
            let (constants, provenance) = match &model {
                ProcessModel::Gaussian { .. } => {
                    let s = model_psd(&model, crate::spectra::DEFAULT_GRID_SIZE).expect("valid model");
                    (process_regularity_c1(&s).expect("positive spectrum"), SPECTRUM)
                }
                _ => (model.regularity_constants(1).expect("positive noise"), SMOOTHING),
            };
            CorpusProcess {
                name: model.label(),
                model,
                constants,
                provenance,
            }
        })
        .collect()
}

fn short(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{r}")
}

/// Text listing of both corpora, one entry per line. Empty when the corpus
/// is compiled out.
pub fn list_corpus() -> String {
    let mut out = String::new();
    for d in density_corpus() {
        let c1 = if d.name == "logistic" {
            "any>0".to_string()
        } else {
            short(d.constants.c1)
        };
        out.push_str(&format!(
            "density  {:<44} n={}  c1={c1}  c2={}  [{}]\n",
            d.name,
            d.density.dim(),
            short(d.constants.c2),
            d.provenance
        ));
    }
    for p in process_corpus() {
        let c2 = match p.constants.c2_growth {
            crate::regularity::C2Growth::Constant => short(p.constants.c2),
            crate::regularity::C2Growth::SqrtN { coefficient } => format!("{}·√n", short(coefficient)),
        };
        out.push_str(&format!(
            "process  {:<44} c1={}  c2={c2}  [{}]\n",
            p.name,
            short(p.constants.c1),
            p.provenance
        ));
    }
    out
}


#[cfg(all(test, not(feature = "corpus")))]
mod tests {
    #[test]
    fn listing_is_empty() {
        assert!(super::list_corpus().is_empty());
    }
}
