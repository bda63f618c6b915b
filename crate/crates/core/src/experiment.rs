//! Config-driven experiments. Each run writes one CSV table and one JSON run
//! record; the record embeds the resolved config, so it can be replayed.
//!
//! Exit status: 0 on success, 1 on input errors, 2 when a bound is violated
//! beyond its tolerance.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{example_model_bound, model_block_bound, model_rate_bound, prop1_delta, theorem1_kl_bound, EntropyBoundReport};
use crate::corpus::{density_corpus, CorpusDensity};
use crate::density::{Density, Gaussian};
use crate::error::{Error, Result};
use crate::estimators::{entropy_quadrature, entropy_knn, kl_monte_carlo, w2_quantile_1d, EstimateWithError, DEFAULT_K};
use crate::regularity::RegularityConstants;
use crate::simulate::{model_covariance, model_density, model_psd, sample_path, ProcessModel};
use crate::spectra::{szego_entropy_rate, AutocovarianceSpec, SpectralDensity, DEFAULT_GRID_SIZE};
use crate::toeplitz::gaussian_entropy_per_coordinate;

pub const FORMAT_VERSION: u32 = 1;
pub const CSV_SCHEMA: &str = "erb-csv v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BoundReport,
    Sandwich,
    Prop1Check,
    Theorem1Check,
    ConvergenceLadder,
    SixNatsSweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BoundReport => "bound_report",
            Self::Sandwich => "sandwich",
            Self::Prop1Check => "prop1_check",
            Self::Theorem1Check => "theorem1_check",
            Self::ConvergenceLadder => "convergence_ladder",
            Self::SixNatsSweep => "six_nats_sweep",
        }
    }
}

/// Output unit. Everything is computed in nats; bits are applied when
/// writing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    pub fn divisor(self) -> f64 {
        match self {
            Self::Nats => 1.0,
            Self::Bits => std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Nats => "nats",
            Self::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Spectral grid size (even).
    pub grid_size: usize,
    pub sample_count: usize,
    pub k: usize,
    /// Block lengths.
    pub ladder: Vec<usize>,
    /// `σ_Z²` values for the six-nats sweep.
    pub noise_variances: Vec<f64>,
    /// Extra slack below the lower bound for kNN bias, in nats.
    pub bias_allowance: f64,
    /// Cells for the 1D quantile coupling.
    pub w2_grid: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID_SIZE,
            sample_count: 100_000,
            k: DEFAULT_K,
            ladder: vec![1, 2, 4, 8],
            noise_variances: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
            bias_allowance: 0.05,
            w2_grid: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ProcessModel>,
    /// Density corpus names (prop1_check); empty means every eligible entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corpus: Vec<String>,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub unit: Unit,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, model: Option<ProcessModel>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            experiment,
            model,
            corpus: Vec::new(),
            knobs: Knobs::default(),
            seed: 0,
            out: None,
            unit: Unit::Nats,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim().to_string()]))
    }

    /// Reads a TOML config, or the config embedded in a JSON run record.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let record: Value = serde_json::from_str(&text).map_err(|e| Error::Config(vec![e.to_string()]))?;
            let config = record
                .get("config")
                .ok_or_else(|| Error::Config(vec!["config: missing from run record".into()]))?;
            return serde_json::from_value(config.clone()).map_err(|e| Error::Config(vec![format!("config: {e}")]));
        }
        Self::from_toml(&text)
    }

    /// Every schema violation, each prefixed by its field path.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.format_version != FORMAT_VERSION {
            out.push(format!("format_version: expected {FORMAT_VERSION}, got {}", self.format_version));
        }
        use ExperimentKind::*;
        let needs_model = matches!(self.experiment, BoundReport | Sandwich | Theorem1Check | ConvergenceLadder);
        match &self.model {
            None if needs_model => out.push(format!("model: required for {}", self.experiment.as_str())),
            None => {}
            Some(m) => model_issues(m, &mut out),
        }
        match (self.experiment, &self.model) {
            (Theorem1Check, Some(m)) if !matches!(m, ProcessModel::TwoPointProductNoise { .. }) => {
                out.push("model.kind: theorem1_check needs two_point_product_noise".into())
            }
            (SixNatsSweep, Some(m)) if !matches!(m, ProcessModel::ProductNoise { .. }) => {
                out.push("model.kind: six_nats_sweep needs product_noise".into())
            }
            _ => {}
        }
        let k = &self.knobs;
        if k.grid_size < 2 || !k.grid_size.is_multiple_of(2) {
            out.push(format!("knobs.grid_size: must be even and >= 2, got {}", k.grid_size));
        }
        if k.k == 0 {
            out.push("knobs.k: must be positive".into());
        }
        if matches!(self.experiment, Sandwich) && k.sample_count < 50 * k.k.max(1) {
            out.push(format!("knobs.sample_count: need at least {} for k = {}", 50 * k.k.max(1), k.k));
        }
        if matches!(self.experiment, Theorem1Check) && k.sample_count < 2 {
            out.push("knobs.sample_count: need at least 2".into());
        }
        if k.ladder.is_empty() {
            out.push("knobs.ladder: must not be empty".into());
        }
        for (i, n) in k.ladder.iter().enumerate() {
            if *n == 0 {
                out.push(format!("knobs.ladder[{i}]: must be positive"));
            }
            if matches!(self.experiment, Theorem1Check) && *n > crate::simulate::MAX_MIXTURE_DIM {
                out.push(format!("knobs.ladder[{i}]: theorem1_check supports n <= {}", crate::simulate::MAX_MIXTURE_DIM));
            }
        }
        for (i, v) in k.noise_variances.iter().enumerate() {
            if !(*v > 0.0 && v.is_finite()) {
                out.push(format!("knobs.noise_variances[{i}]: must be positive, got {v}"));
            }
        }
        if !(k.bias_allowance >= 0.0) {
            out.push("knobs.bias_allowance: must be nonnegative".into());
        }
        if k.w2_grid < 2 {
            out.push("knobs.w2_grid: must be at least 2".into());
        }
        let names: Vec<String> = density_corpus().into_iter().map(|d| d.name).collect();
        for (i, c) in self.corpus.iter().enumerate() {
            if !names.contains(c) {
                out.push(format!("corpus[{i}]: unknown density `{c}`"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

fn spec_issues(path: &str, spec: &AutocovarianceSpec, out: &mut Vec<String>) {
    match spec.validate() {
        Ok(()) => {}
        Err(Error::InvalidParameter { name, reason }) => out.push(format!("{path}.parameters.{name}: {reason}")),
        Err(e) => out.push(format!("{path}: {e}")),
    }
}

fn model_issues(model: &ProcessModel, out: &mut Vec<String>) {
    let noise = |v: f64, allow_zero: bool, out: &mut Vec<String>| {
        let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
        if !ok {
            let need = if allow_zero { "nonnegative" } else { "positive" };
            out.push(format!("model.noise_variance: must be {need}, got {v}"));
        }
    };
    match model {
        ProcessModel::Gaussian { spec, mean } => {
            spec_issues("model.spec", spec, out);
            if !mean.is_finite() {
                out.push("model.mean: must be finite".into());
            }
        }
        ProcessModel::ProductNoise {
            spec_h,
            spec_x,
            noise_variance,
        } => {
            spec_issues("model.spec_h", spec_h, out);
            spec_issues("model.spec_x", spec_x, out);
            noise(*noise_variance, true, out);
        }
        ProcessModel::TwoPointProductNoise { spec_h, noise_variance } => {
            spec_issues("model.spec_h", spec_h, out);
            noise(*noise_variance, false, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Tables

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

/// Column name and whether it holds an entropy-like quantity (converted to
/// bits on request).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub entropy: bool,
}

const fn col(name: &'static str) -> Column {
    Column { name, entropy: false }
}

const fn ent(name: &'static str) -> Column {
    Column { name, entropy: true }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    fn render(&self, cell: &Cell, c: Column, unit: Unit) -> (String, Value) {
        match cell {
            Cell::Num(v) => {
                let v = if c.entropy { v / unit.divisor() } else { *v };
                (format!("{v}"), json!(v))
            }
            Cell::Int(v) => (v.to_string(), json!(v)),
            Cell::Text(s) => (s.clone(), json!(s)),
            Cell::Flag(b) => (b.to_string(), json!(b)),
        }
    }

    pub fn to_csv(&self, experiment: ExperimentKind, unit: Unit) -> String {
        let mut out = format!("# {CSV_SCHEMA} experiment={} unit={}\n", experiment.as_str(), unit.as_str());
        let header: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().zip(&self.columns).map(|(v, c)| self.render(v, *c, unit).0).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self, unit: Unit) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let map = row
                        .iter()
                        .zip(&self.columns)
                        .map(|(v, c)| (c.name.to_string(), self.render(v, *c, unit).1))
                        .collect();
                    Value::Object(map)
                })
                .collect(),
        )
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let j = self.columns.iter().position(|c| c.name == name).expect("known column");
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Cell::Num(v) => *v,
                Cell::Int(v) => *v as f64,
                _ => f64::NAN,
            })
            .collect()
    }
}

/// A bound that failed beyond its tolerance, with everything needed to
/// inspect it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub table: Table,
    pub violations: Vec<Violation>,
}

fn rung_seed(seed: u64, n: usize) -> u64 {
    seed ^ ((n as u64) << 32)
}

// ---------------------------------------------------------------------------
// Experiments. Each returns typed rows; `run` turns them into tables.

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub noise_variance: f64,
    pub report: EntropyBoundReport,
}

/// Rate bounds of the product model for each noise level.
pub fn six_nats_sweep(
    spec_h: &AutocovarianceSpec,
    spec_x: &AutocovarianceSpec,
    noise_variances: &[f64],
    grid_size: usize,
) -> Result<Vec<SweepRow>> {
    let s_h = SpectralDensity::from_autocovariance(spec_h, grid_size)?;
    let s_x = SpectralDensity::from_autocovariance(spec_x, grid_size)?;
    noise_variances
        .iter()
        .map(|&v| {
            Ok(SweepRow {
                noise_variance: v,
                report: example_model_bound(spec_h.variance(), spec_x.variance(), v, &s_h, &s_x)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub n: usize,
    /// kNN estimate of `h(Yⁿ)/n`.
    pub estimate: EstimateWithError,
    pub bounds: EntropyBoundReport,
    pub lower_limit: f64,
    pub upper_limit: f64,
    pub pass: bool,
}

/// Checks `lower - 3 SE - allowance ≤ ĥ(Yⁿ)/n ≤ upper + 3 SE` on each rung.
pub fn sandwich(
    model: &ProcessModel,
    ladder: &[usize],
    count: usize,
    k: usize,
    seed: u64,
    bias_allowance: f64,
) -> Result<Vec<SandwichRow>> {
    ladder
        .iter()
        .map(|&n| {
            let samples = sample_path(model, n, count, rung_seed(seed, n))?;
            let estimate = entropy_knn(&samples, k)?.per_coordinate(n);
            let bounds = model_block_bound(model, n)?;
            let lower_limit = bounds.lower_nats - 3.0 * estimate.std_error - bias_allowance;
            let upper_limit = bounds.upper_nats + 3.0 * estimate.std_error;
            let pass = estimate.value >= lower_limit && estimate.value <= upper_limit;
            Ok(SandwichRow {
                n,
                estimate,
                bounds,
                lower_limit,
                upper_limit,
                pass,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Row {
    pub name: String,
    pub entropy_f: f64,
    pub entropy_g: f64,
    /// `h(g) - h(f)` for the moment-matched Gaussian `g`.
    pub gap: f64,
    /// Quadrature error bound on `gap`.
    pub gap_error: f64,
    pub w2: f64,
    pub constants: RegularityConstants,
    pub delta: f64,
    pub pass: bool,
}

/// `h(g) - h(f) ≤ Δ` for each 1D corpus density `f` against its matched
/// Gaussian `g`, with constants valid for both.
pub fn prop1_check(entries: &[CorpusDensity], w2_grid: usize) -> Result<Vec<Prop1Row>> {
    entries
        .iter()
        .filter(|e| e.density.dim() == 1)
        .map(|e| {
            let f = e.density.as_ref();
            let g = Gaussian::moment_matched(f)?;
            let var = g.covariance()[0];
            let half = 12.0 * var.sqrt() + g.mean()[0].abs();
            let hf = entropy_quadrature(f, &e.bounds, e.quadrature_grid)?;
            let hg = entropy_quadrature(&g, &[(-half, half)], e.quadrature_grid)?;
            let w2 = w2_quantile_1d(f, &g, w2_grid)?;
            let constants = RegularityConstants::constant(e.constants.c1.max(1.0 / var), e.constants.c2)?;
            let m2 = var + g.mean()[0].powi(2);
            let delta = prop1_delta(constants.c1, constants.c2, m2, m2, w2);
            let gap = hg.value - hf.value;
            let gap_error = hf.std_error + hg.std_error;
            Ok(Prop1Row {
                name: e.name.clone(),
                entropy_f: hf.value,
                entropy_g: hg.value,
                gap,
                gap_error,
                w2,
                constants,
                delta,
                pass: gap <= delta + gap_error,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Row {
    pub n: usize,
    /// Monte Carlo `D(f⁽ⁿ⁾ ‖ g⁽ⁿ⁾)/n` against the moment-matched Gaussian.
    pub kl_per_n: EstimateWithError,
    pub bound: f64,
    pub constants: RegularityConstants,
    /// `(bound - estimate) / SE`.
    pub margin_se: f64,
    pub pass: bool,
}

pub fn theorem1_check(model: &ProcessModel, ladder: &[usize], count: usize, seed: u64) -> Result<Vec<Theorem1Row>> {
    ladder
        .iter()
        .map(|&n| {
            let f = model_density(model, n)?;
            let g = Gaussian::moment_matched(&f)?;
            let samples = sample_path(model, n, count, rung_seed(seed, n))?;
            let kl_per_n = kl_monte_carlo(&f, &g, &samples)?.per_coordinate(n);
            let constants = model.regularity_constants(n)?;
            let bound = theorem1_kl_bound(&constants, model.second_moment(), n)?;
            let margin_se = (bound - kl_per_n.value) / kl_per_n.std_error;
            Ok(Theorem1Row {
                n,
                pass: kl_per_n.value <= bound,
                kl_per_n,
                bound,
                constants,
                margin_se,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    /// Per-coordinate entropy of the Gaussian with the block covariance.
    pub per_coordinate: f64,
    pub rate: f64,
}

pub fn convergence_ladder(model: &ProcessModel, ladder: &[usize], grid_size: usize) -> Result<Vec<LadderRow>> {
    let rate = szego_entropy_rate(&model_psd(model, grid_size)?)?;
    ladder
        .iter()
        .map(|&n| {
            Ok(LadderRow {
                n,
                per_coordinate: gaussian_entropy_per_coordinate(&model_covariance(model, n)?)?,
                rate,
            })
        })
        .collect()
}

fn bound_columns() -> Vec<Column> {
    vec![
        col("n"),
        ent("upper"),
        ent("kl_bound"),
        ent("lower"),
        col("c1"),
        col("c2"),
        col("c2_growth"),
        col("second_moment"),
    ]
}

fn bound_cells(r: &EntropyBoundReport) -> Vec<Cell> {
    vec![
        Cell::Int(r.n as u64),
        Cell::Num(r.upper_nats),
        Cell::Num(r.kl_per_n_bound),
        Cell::Num(r.lower_nats),
        Cell::Num(r.constants_used.c1),
        Cell::Num(r.constants_used.c2),
        Cell::Text(r.constants_used.growth_label()),
        Cell::Num(r.second_moment),
    ]
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs the experiment in memory. The config must already be valid.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let k = &config.knobs;
    let mut result = ExperimentResult::default();
    let model = config.model.as_ref();
    match config.experiment {
        ExperimentKind::BoundReport => {
            let model = model.expect("validated");
            let mut t = Table::new(bound_columns());
            let mut reports = vec![model_rate_bound(model, k.grid_size)?];
            for &n in &k.ladder {
                reports.push(model_block_bound(model, n)?);
            }
            for r in &reports {
                if r.lower_nats > r.upper_nats {
                    result.violations.push(Violation {
                        check: format!("lower <= upper at n = {}", r.n),
                        detail: to_value(r),
                    });
                }
                t.rows.push(bound_cells(r));
            }
            result.table = t;
        }
        ExperimentKind::Sandwich => {
            let rows = sandwich(model.expect("validated"), &k.ladder, k.sample_count, k.k, config.seed, k.bias_allowance)?;
            let mut t = Table::new(vec![
                col("n"),
                ent("estimate"),
                ent("std_error"),
                ent("lower"),
                ent("upper"),
                ent("lower_limit"),
                ent("upper_limit"),
                col("pass"),
            ]);
            for r in rows {
                t.rows.push(vec![
                    Cell::Int(r.n as u64),
                    Cell::Num(r.estimate.value),
                    Cell::Num(r.estimate.std_error),
                    Cell::Num(r.bounds.lower_nats),
                    Cell::Num(r.bounds.upper_nats),
                    Cell::Num(r.lower_limit),
                    Cell::Num(r.upper_limit),
                    Cell::Flag(r.pass),
                ]);
                if !r.pass {
                    result.violations.push(Violation {
                        check: format!("sandwich at n = {}", r.n),
                        detail: to_value(&r),
                    });
                }
            }
            result.table = t;
        }
        ExperimentKind::Prop1Check => {
            let entries: Vec<CorpusDensity> = density_corpus()
                .into_iter()
                .filter(|d| {
                    if config.corpus.is_empty() {
                        !d.is_gaussian
                    } else {
                        config.corpus.contains(&d.name)
                    }
                })
                .collect();
            let rows = prop1_check(&entries, k.w2_grid)?;
            let mut t = Table::new(vec![
                col("density"),
                ent("entropy_f"),
                ent("entropy_g"),
                ent("gap"),
                col("w2"),
                col("c1"),
                col("c2"),
                ent("delta"),
                col("pass"),
            ]);
            for r in rows {
                t.rows.push(vec![
                    Cell::Text(r.name.clone()),
                    Cell::Num(r.entropy_f),
                    Cell::Num(r.entropy_g),
                    Cell::Num(r.gap),
                    Cell::Num(r.w2),
                    Cell::Num(r.constants.c1),
                    Cell::Num(r.constants.c2),
                    Cell::Num(r.delta),
                    Cell::Flag(r.pass),
                ]);
                if !r.pass {
                    result.violations.push(Violation {
                        check: format!("entropy gap <= delta for {}", r.name),
                        detail: to_value(&r),
                    });
                }
            }
            result.table = t;
        }
        ExperimentKind::Theorem1Check => {
            let model = model.expect("validated");
            let rows = theorem1_check(model, &k.ladder, k.sample_count, config.seed)?;
            let mut t = Table::new(vec![
                col("n"),
                ent("kl_per_n"),
                ent("std_error"),
                ent("bound"),
                col("margin_se"),
                col("pass"),
            ]);
            for r in rows {
                t.rows.push(vec![
                    Cell::Int(r.n as u64),
                    Cell::Num(r.kl_per_n.value),
                    Cell::Num(r.kl_per_n.std_error),
                    Cell::Num(r.bound),
                    Cell::Num(r.margin_se),
                    Cell::Flag(r.pass),
                ]);
                // beyond tolerance: even the estimate minus 3 SE exceeds the bound
                if r.kl_per_n.value - 3.0 * r.kl_per_n.std_error > r.bound {
                    result.violations.push(Violation {
                        check: format!("divergence bound at n = {}", r.n),
                        detail: json!({
                            "row": to_value(&r),
                            "report": to_value(&model_block_bound(model, r.n)?),
                        }),
                    });
                }
            }
            result.table = t;
        }
        ExperimentKind::ConvergenceLadder => {
            let rows = convergence_ladder(model.expect("validated"), &k.ladder, k.grid_size)?;
            let mut t = Table::new(vec![col("n"), ent("per_coordinate"), ent("rate"), ent("excess")]);
            let mut previous = f64::INFINITY;
            for r in rows {
                let excess = r.per_coordinate - r.rate;
                t.rows.push(vec![
                    Cell::Int(r.n as u64),
                    Cell::Num(r.per_coordinate),
                    Cell::Num(r.rate),
                    Cell::Num(excess),
                ]);
                if excess < -1e-9 {
                    result.violations.push(Violation {
                        check: format!("block entropy above the rate at n = {}", r.n),
                        detail: to_value(&r),
                    });
                }
                if r.per_coordinate > previous + 1e-12 {
                    result.violations.push(Violation {
                        check: format!("block entropy non-increasing at n = {}", r.n),
                        detail: to_value(&r),
                    });
                }
                previous = r.per_coordinate;
            }
            result.table = t;
        }
        ExperimentKind::SixNatsSweep => {
            let flat = AutocovarianceSpec::white(1.0)?;
            let (spec_h, spec_x) = match model {
                Some(ProcessModel::ProductNoise { spec_h, spec_x, .. }) => (spec_h.clone(), spec_x.clone()),
                _ => (flat.clone(), flat),
            };
            let rows = six_nats_sweep(&spec_h, &spec_x, &k.noise_variances, k.grid_size)?;
            let mut t = Table::new(vec![col("noise_variance"), ent("upper"), ent("lower"), ent("gap")]);
            let mut previous = f64::INFINITY;
            for r in rows {
                let gap = r.report.gap();
                t.rows.push(vec![
                    Cell::Num(r.noise_variance),
                    Cell::Num(r.report.upper_nats),
                    Cell::Num(r.report.lower_nats),
                    Cell::Num(gap),
                ]);
                if !(gap > 6.0) || r.report.lower_nats > r.report.upper_nats {
                    result.violations.push(Violation {
                        check: format!("gap above 6 nats at noise variance {}", r.noise_variance),
                        detail: to_value(&r),
                    });
                }
                if gap >= previous {
                    result.violations.push(Violation {
                        check: format!("gap decreasing at noise variance {}", r.noise_variance),
                        detail: to_value(&r),
                    });
                }
                previous = gap;
            }
            result.table = t;
        }
    }
    Ok(result)
}

/// Files written by a run and its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub violations: Vec<Violation>,
}

pub const DEFAULT_OUT_DIR: &str = "erb-out";

/// Runs the experiment and writes `<experiment>.csv` and `<experiment>.json`
/// into the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let result = execute(config)?;
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&dir)?;
    let stem = config.experiment.as_str();
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&csv_path, result.table.to_csv(config.experiment, config.unit))?;
    let exit_code = if result.violations.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    let record = json!({
        "format_version": FORMAT_VERSION,
        "experiment": stem,
        "unit": config.unit.as_str(),
        "status": if exit_code == EXIT_OK { "pass" } else { "violation" },
        "exit_code": exit_code,
        "config": to_value(config),
        "columns": result.table.columns.iter().map(|c| c.name).collect::<Vec<_>>(),
        "rows": result.table.to_json_rows(config.unit),
        "violations": to_value(&result.violations),
    });
    fs::write(&json_path, serde_json::to_string_pretty(&record).expect("serializable") + "\n")?;
    Ok(RunOutcome {
        exit_code,
        csv_path,
        json_path,
        violations: result.violations,
    })
}
