//! Configuration-driven runs: parse a TOML run file, prepare and evolve the
//! state, solve the orbit, compute every flux and write the report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::classical::{solve_orbit_with, ClassicalOrbit, OrbitOptions, DEFAULT_ORBIT_SAMPLES, DEFAULT_TAU_LIMIT};
use crate::currents::{PotentialKind, PotentialModel, DEFAULT_MASK_RELATIVE, DEFAULT_NU_MAX, MAX_NU};
use crate::error::{Error, Result};
use crate::fluxes::{AnalysisConfig, FluxAnalysis, FluxReport, DEFAULT_DTAU_FD, DEFAULT_REGION_SUBSAMPLES};
use crate::grid::{CoordinateGrid, DimensionlessMap, PhaseSpaceGrid};
use crate::observables::{validate_beta, DEFAULT_NEGATIVITY_FLOOR, DEFAULT_SVN_EPSILON};
use crate::states::{StateSpec, WignerField};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_extent")]
    pub x_max: f64,
    #[serde(default = "default_extent")]
    pub k_max: f64,
    #[serde(default = "default_nodes")]
    pub n_x: usize,
    #[serde(default = "default_nodes")]
    pub n_k: usize,
    /// Coordinate nodes for the wavefunction (power of two, spacing matched to the x axis).
    #[serde(default = "default_coordinate_nodes")]
    pub coordinate_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_max: default_extent(),
            k_max: default_extent(),
            n_x: default_nodes(),
            n_k: default_nodes(),
            coordinate_nodes: default_coordinate_nodes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    pub start: [f64; 2],
    #[serde(default = "default_orbit_dtau")]
    pub dtau: f64,
    #[serde(default = "default_orbit_samples")]
    pub samples: usize,
    #[serde(default = "default_tau_limit")]
    pub tau_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    #[serde(default = "default_nu_max")]
    pub nu_max: usize,
    #[serde(default = "default_svn_epsilon")]
    pub svn_epsilon: f64,
    #[serde(default = "default_mask_relative")]
    pub mask_relative: f64,
    #[serde(default = "default_negativity_floor")]
    pub negativity_floor: f64,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_dtau_evolve")]
    pub dtau_evolve: f64,
    #[serde(default = "default_dtau_fd")]
    pub dtau_fd: f64,
    #[serde(default = "default_output_times")]
    pub output_times: Vec<f64>,
    #[serde(default = "default_region_subsamples")]
    pub region_subsamples: usize,
    #[serde(default = "default_segments")]
    pub accumulation_segments: usize,
}

impl Default for FluxConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_fields: bool,
}

/// Physical scales; when present, `orbit.start` and state displacements are
/// `(q, p)` and every time is `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialKind,
    pub state: StateSpec,
    #[serde(default)]
    pub grid: GridConfig,
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub flux: FluxConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub units: Option<UnitsConfig>,
}

fn default_extent() -> f64 {
    8.0
}
fn default_nodes() -> usize {
    256
}
fn default_coordinate_nodes() -> usize {
    512
}
fn default_orbit_dtau() -> f64 {
    1e-4
}
fn default_orbit_samples() -> usize {
    DEFAULT_ORBIT_SAMPLES
}
fn default_tau_limit() -> f64 {
    DEFAULT_TAU_LIMIT
}
fn default_nu_max() -> usize {
    DEFAULT_NU_MAX
}
fn default_svn_epsilon() -> f64 {
    DEFAULT_SVN_EPSILON
}
fn default_mask_relative() -> f64 {
    DEFAULT_MASK_RELATIVE
}
fn default_negativity_floor() -> f64 {
    DEFAULT_NEGATIVITY_FLOOR
}
fn default_betas() -> Vec<f64> {
    vec![0.5, 2.0, 3.0]
}
fn default_dtau_evolve() -> f64 {
    1e-3
}
fn default_dtau_fd() -> f64 {
    DEFAULT_DTAU_FD
}
fn default_output_times() -> Vec<f64> {
    vec![0.0]
}
fn default_region_subsamples() -> usize {
    DEFAULT_REGION_SUBSAMPLES
}
fn default_segments() -> usize {
    32
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(format!("{name} = {v} must be positive and finite")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(e.message().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Converts physical inputs to dimensionless ones; the `units` block is consumed.
    pub fn into_dimensionless(mut self) -> Result<Self> {
        let Some(u) = self.units.take() else {
            return Ok(self);
        };
        let map = DimensionlessMap::new(u.m, u.omega, u.hbar).map_err(|e| config_error(e.to_string()))?;
        let [q, p] = self.orbit.start;
        self.orbit.start = [map.x_from_q(q), map.k_from_p(p)];
        self.orbit.dtau = map.tau_from_t(self.orbit.dtau);
        self.orbit.tau_limit = map.tau_from_t(self.orbit.tau_limit);
        if let StateSpec::Coherent { x0, k0 } | StateSpec::Cat { x0, k0 } = &mut self.state {
            *x0 = map.x_from_q(*x0);
            *k0 = map.k_from_p(*k0);
        }
        let f = &mut self.flux;
        f.dtau_evolve = map.tau_from_t(f.dtau_evolve);
        f.dtau_fd = map.tau_from_t(f.dtau_fd);
        for t in &mut f.output_times {
            *t = map.tau_from_t(*t);
        }
        Ok(self)
    }

    /// Checks every module precondition that can be decided before computing.
    pub fn validate(&self) -> Result<()> {
        if self.units.is_some() {
            return Err(config_error("units block must be converted before validation"));
        }
        let g = &self.grid;
        positive("grid.x_max", g.x_max)?;
        positive("grid.k_max", g.k_max)?;
        PhaseSpaceGrid::new(g.x_max, g.k_max, g.n_x, g.n_k).map_err(|e| config_error(e.to_string()))?;
        if !g.coordinate_nodes.is_power_of_two() || g.coordinate_nodes < 2 * g.n_x.saturating_sub(1) {
            return Err(config_error(format!(
                "grid.coordinate_nodes = {} must be a power of two >= 2 (n_x - 1)",
                g.coordinate_nodes
            )));
        }
        PotentialModel::from_kind(self.potential).map_err(|e| config_error(e.to_string()))?;
        self.state.validate().map_err(|e| config_error(e.to_string()))?;
        let o = &self.orbit;
        if !o.start.iter().all(|v| v.is_finite()) {
            return Err(config_error("orbit.start must be finite"));
        }
        positive("orbit.dtau", o.dtau)?;
        positive("orbit.tau_limit", o.tau_limit)?;
        if o.samples < 8 {
            return Err(config_error("orbit.samples must be at least 8"));
        }
        let f = &self.flux;
        if f.nu_max > MAX_NU {
            return Err(config_error(format!("flux.nu_max = {} exceeds {MAX_NU}", f.nu_max)));
        }
        positive("flux.svn_epsilon", f.svn_epsilon)?;
        positive("flux.mask_relative", f.mask_relative)?;
        positive("flux.dtau_evolve", f.dtau_evolve)?;
        positive("flux.dtau_fd", f.dtau_fd)?;
        if !(f.negativity_floor.is_finite() && f.negativity_floor >= 0.0) {
            return Err(config_error("flux.negativity_floor must be >= 0"));
        }
        for &b in &f.betas {
            validate_beta(b).map_err(|e| match e {
                Error::InvalidParameter(m) => config_error(m),
                other => other,
            })?;
        }
        if f.output_times.is_empty() || !f.output_times.iter().all(|t| t.is_finite()) {
            return Err(config_error("flux.output_times must be a non-empty list of finite times"));
        }
        if f.region_subsamples == 0 {
            return Err(config_error("flux.region_subsamples must be >= 1"));
        }
        Ok(())
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        let f = &self.flux;
        AnalysisConfig {
            nu_max: f.nu_max,
            svn_epsilon: f.svn_epsilon,
            mask_relative: f.mask_relative,
            negativity_floor: f.negativity_floor,
            betas: f.betas.clone(),
            dtau_evolve: f.dtau_evolve,
            dtau_fd: f.dtau_fd,
            output_times: f.output_times.clone(),
            region_subsamples: f.region_subsamples,
            accumulation_segments: f.accumulation_segments,
        }
    }
}

/// Failure of one run stage, printable as a single `key=value` line.
#[derive(Debug)]
pub struct RunError {
    pub stage: &'static str,
    pub error: Error,
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self.error {
            Error::Config(_) => EXIT_CONFIG,
            Error::Io(_) => EXIT_IO,
            _ => EXIT_NUMERICAL,
        }
    }

    pub fn line(&self) -> String {
        let message = self.error.to_string().replace(['\n', '"'], " ");
        format!(
            "error code={} stage={} kind={} message=\"{}\"",
            self.exit_code(),
            self.stage,
            self.error.kind(),
            message
        )
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, RunError>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, RunError> {
        self.map_err(|error| RunError { stage, error })
    }
}

/// Files written by [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: FluxReport,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Shortest round-trip decimal for CSV cells.
fn cell(v: f64) -> String {
    format!("{v:?}")
}

pub fn fluxes_csv(report: &FluxReport) -> String {
    let betas: Vec<String> = report.config.betas.iter().map(|b| cell(*b)).collect();
    let mut cols: Vec<String> = ["tau", "sigma_flux", "svn_flux", "purity_flux"].map(String::from).to_vec();
    let per_beta = |prefix: &str| betas.iter().map(|b| format!("{prefix}_{b}")).collect::<Vec<_>>();
    cols.extend(per_beta("renyi_flux"));
    cols.extend(["volume_svn", "volume_purity"].map(String::from));
    cols.extend(per_beta("volume_renyi"));
    cols.extend(per_beta("renyi_rate"));
    cols.extend(["full_svn", "full_purity"].map(String::from));
    cols.extend(per_beta("full_renyi"));
    cols.extend(["oracle_sigma", "oracle_svn", "oracle_purity"].map(String::from));
    cols.extend(per_beta("oracle_renyi"));
    cols.extend(["deviation_sigma", "deviation_svn", "deviation_purity"].map(String::from));
    cols.extend(per_beta("deviation_renyi"));
    let mut out = cols.join(",");
    out.push('\n');
    for row in &report.instants {
        let mut v = vec![row.tau, row.sigma.loop_flux, row.svn.loop_flux, row.purity.loop_flux];
        v.extend(row.renyi.iter().map(|r| r.comparison.loop_flux));
        v.extend([row.svn.volume_term, row.purity.volume_term]);
        v.extend(row.renyi.iter().map(|r| r.comparison.volume_term));
        v.extend(row.renyi.iter().map(|r| r.rate_as_printed));
        v.extend([row.svn.full_form, row.purity.full_form]);
        v.extend(row.renyi.iter().map(|r| r.comparison.full_form));
        v.extend([row.sigma.oracle, row.svn.oracle, row.purity.oracle]);
        v.extend(row.renyi.iter().map(|r| r.comparison.oracle));
        v.extend([row.sigma.relative_deviation, row.svn.relative_deviation, row.purity.relative_deviation]);
        v.extend(row.renyi.iter().map(|r| r.comparison.relative_deviation));
        out.push_str(&v.iter().map(|x| cell(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn orbit_csv(orbit: &ClassicalOrbit) -> String {
    let mut out = String::from("tau,x_C,k_C,n_x,n_k,dl\n");
    for s in &orbit.samples {
        let _ = writeln!(out, "{},{},{},{},{},{}", cell(s.tau), cell(s.x), cell(s.k), cell(s.nx), cell(s.nk), cell(s.dl));
    }
    out
}

pub fn field_csv(w: &WignerField) -> String {
    let g = w.grid();
    let mut out = String::from("x,k,W\n");
    for ((i, j), v) in w.values().indexed_iter() {
        let _ = writeln!(out, "{},{},{}", cell(g.x(i)), cell(g.k(j)), cell(*v));
    }
    out
}

/// Executes a validated, dimensionless configuration and writes its outputs into `dir`.
pub fn run(config: &RunConfig, dir: &Path, emit_fields: bool) -> std::result::Result<RunOutput, RunError> {
    config.validate().stage("config")?;
    let potential = PotentialModel::from_kind(config.potential).stage("config")?;
    let g = &config.grid;
    let grid = PhaseSpaceGrid::new(g.x_max, g.k_max, g.n_x, g.n_k).stage("grid")?;
    let coordinates = CoordinateGrid::matching(&grid, g.coordinate_nodes).stage("grid")?;
    let options = OrbitOptions { samples: config.orbit.samples, tau_limit: config.orbit.tau_limit, bound: g.x_max.min(g.k_max) };
    let start = (config.orbit.start[0], config.orbit.start[1]);
    let orbit = solve_orbit_with(&potential, start, config.orbit.dtau, &options).stage("classical")?;
    let analysis_config = config.analysis_config();
    let analysis = FluxAnalysis {
        spec: &config.state,
        potential: &potential,
        grid,
        coordinates,
        orbit: &orbit,
        config: &analysis_config,
    };
    let output = analysis.run().stage("fluxes")?;

    let io = |e: std::io::Error| RunError { stage: "output", error: Error::Io(e) };
    fs::create_dir_all(dir).map_err(io)?;
    let mut files = Vec::new();
    let mut write = |name: PathBuf, text: String| -> std::result::Result<(), RunError> {
        fs::write(&name, text).map_err(io)?;
        files.push(name);
        Ok(())
    };
    let json = serde_json::to_string_pretty(&output.report)
        .map_err(|e| RunError { stage: "output", error: Error::Io(std::io::Error::other(e)) })?;
    write(dir.join("report.json"), json)?;
    write(dir.join("fluxes.csv"), fluxes_csv(&output.report))?;
    write(dir.join("orbit.csv"), orbit_csv(&orbit))?;
    if emit_fields {
        let fields = dir.join("fields");
        fs::create_dir_all(&fields).map_err(io)?;
        for w in &output.snapshots {
            write(fields.join(format!("W_{}.csv", cell(w.tau()))), field_csv(w))?;
        }
    }
    Ok(RunOutput { report: output.report, dir: dir.to_path_buf(), files })
}

#[derive(Debug, Parser)]
#[command(name = "wigner-flux", version, about = "Wigner-current fluxes through classical orbits")]
pub struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir` (default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write `fields/W_<tau>.csv` for each output time.
    #[arg(long)]
    pub emit_fields: bool,
    /// Suppress the summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

/// Runs the command line and returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let result = RunConfig::load(&args.config)
        .stage("config")
        .and_then(|c| c.into_dimensionless().stage("config"))
        .and_then(|c| {
            let dir = args.out.clone().or_else(|| c.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            run(&c, &dir, args.emit_fields || c.output.emit_fields)
        });
    match result {
        Ok(out) => {
            if !args.quiet {
                let r = &out.report;
                println!("orbit E={} T={} samples={}", r.orbit.energy, r.orbit.period, r.orbit.samples);
                for row in &r.instants {
                    println!(
                        "tau={} sigma={:.6e} svn={:.6e} purity={:.6e} (oracle deviations {:.2e} {:.2e} {:.2e})",
                        row.tau,
                        row.sigma.loop_flux,
                        row.svn.loop_flux,
                        row.purity.loop_flux,
                        row.sigma.relative_deviation,
                        row.svn.relative_deviation,
                        row.purity.relative_deviation
                    );
                }
                println!("wrote {} files to {}", out.files.len(), out.dir.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    main_with(Args::parse())
}
