//! `hinv`: phase-space characterization, drift tracking, VQE landscapes and
//! MS-gate fidelity from the command line.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failure.
//! A fit that does not converge is a result (`"converged": false`), not an
//! error.

mod config;
mod svg;

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hinv::charfit::{
    drift_schedule, ingest_grid, lm_fit_joint, run_grid, track_drift, write_grid, Bounds, DriftScenario, FitOptions,
    GridMode, PhaseSpaceMap, SweepSpec, SweepVariant,
};
use hinv::circuit::CompileMode;
use hinv::gates::{ms_gate_fidelity, MsNoiseParams};
use hinv::vqe::{alpha_grid, exact_ground_energy, h2_hamiltonian, landscape, LandscapePoint, LandscapeSpec, Mitigation};
use serde::Serialize;

use config::NoiseConfig;
use svg::{Series, Style};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn numerical(e: hinv::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "hinv", version, about = "Hidden-inverse noise characterization and VQE mitigation experiments")]
struct Cli {
    /// Worker threads for grid and landscape evaluation.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate (or ingest) a phase-space grid and optionally fit (ε, φ, δ/Ω).
    Characterize(CharacterizeArgs),
    /// Track fitted noise parameters across a sequence of runs.
    Drift(DriftArgs),
    /// Sweep the H2 VQE energy landscape.
    Vqe(VqeArgs),
    /// Average gate fidelity of the configured MS gate against ideal XX(π/2).
    Fidelity(FidelityArgs),
    /// Exact ground energy of the H2 Hamiltonian.
    Exact,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Repetitions of the sweep block before measurement.
    #[arg(long, default_value_t = 100)]
    reps: u32,
    /// Grid points per axis.
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Grid half-range in radians (default π/36).
    #[arg(long, value_name = "RAD")]
    half_range: Option<f64>,
    /// Shots per grid point in sampled mode.
    #[arg(long, default_value_t = 200)]
    shots: u64,
}

impl GridArgs {
    fn spec(&self, variant: SweepVariant) -> CliResult<SweepSpec> {
        let spec = SweepSpec {
            variant,
            reps: self.reps,
            n_points: self.points,
            half_range: self.half_range.unwrap_or(PI / 36.0),
            shots: self.shots,
        };
        spec.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Args, Debug)]
struct CharacterizeArgs {
    /// Sweep variant; repeat for a joint fit over several variants.
    #[arg(long = "variant", default_value = "inverse-XZ", value_name = "native-XZ|inverse-XZ|native-YZ|inverse-YZ")]
    variants: Vec<String>,
    #[command(flatten)]
    grid: GridArgs,
    /// Noise config JSON.
    #[arg(long, value_name = "PATH")]
    noise: Option<PathBuf>,
    /// Infinite-shot populations (default).
    #[arg(long, conflicts_with = "sampled")]
    analytic: bool,
    /// Binomially sampled populations; requires --seed.
    #[arg(long)]
    sampled: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Read the grid from a CSV instead of simulating it (one per --variant).
    #[arg(long = "ingest", value_name = "CSV")]
    ingest: Vec<PathBuf>,
    /// Grid CSV output. With several variants, `STEM.VARIANT.csv` per variant.
    #[arg(long, value_name = "CSV", default_value = "grid.csv")]
    out: PathBuf,
    /// Fit the grid(s) and write the result JSON.
    #[arg(long)]
    fit: bool,
    /// Fit JSON output (default `STEM.fit.json` next to --out).
    #[arg(long, value_name = "JSON")]
    fit_out: Option<PathBuf>,
    /// SVG heatmap of the first grid.
    #[arg(long, value_name = "SVG")]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    Natural,
    Recalibrated,
    AmpInjected,
    PhaseInjected,
}

impl From<ScenarioArg> for DriftScenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Natural => DriftScenario::Natural,
            ScenarioArg::Recalibrated => DriftScenario::Recalibrated,
            ScenarioArg::AmpInjected => DriftScenario::AmpInjected,
            ScenarioArg::PhaseInjected => DriftScenario::PhaseInjected,
        }
    }
}

#[derive(Args, Debug)]
struct DriftArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Total ramp for injected scenarios, or per-run step σ of the natural walk.
    #[arg(long, default_value_t = 0.02)]
    amount: f64,
    #[arg(long, default_value = "inverse-XZ")]
    variant: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Noise config JSON for the starting parameters.
    #[arg(long, value_name = "PATH")]
    noise: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "CSV", default_value = "drift.csv")]
    out: PathBuf,
    #[arg(long, value_name = "SVG")]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Default,
    Hi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MitigationArg {
    None,
    Rc,
}

#[derive(Args, Debug)]
struct VqeArgs {
    #[arg(long, value_enum, default_value = "default")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "none")]
    mitigation: MitigationArg,
    /// Also report purified energies.
    #[arg(long)]
    purify: bool,
    /// Symmetric MS rotation error in radians added to |θ| (negative = under-rotation).
    #[arg(long, value_name = "RAD", default_value_t = 0.0, allow_negative_numbers = true)]
    inject_rotation: f64,
    /// Noise config JSON; only the "ms" section is used.
    #[arg(long, value_name = "PATH")]
    ms_noise: Option<PathBuf>,
    /// Number of α points on [−π/2, π/2].
    #[arg(long, default_value_t = 41)]
    alphas: usize,
    /// Shots per measurement basis per α; 0 writes only the analytic curve.
    #[arg(long, default_value_t = 200)]
    shots: u64,
    /// Twirled circuits per α under randomized compiling.
    #[arg(long, default_value_t = 10)]
    rc_circuits: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "CSV", default_value = "landscape.csv")]
    out: PathBuf,
    #[arg(long, value_name = "SVG")]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    FullCooling,
    InjectedUnderrotation,
    ReducedCooling,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    /// Noise config JSON; only the "ms" section is used.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    ms_noise: Option<PathBuf>,
    /// Built-in calibrated MS noise model.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("hinv: invalid input: --threads must be ≥ 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("hinv: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Characterize(a) => characterize(a),
        Command::Drift(a) => drift(a),
        Command::Vqe(a) => vqe(a),
        Command::Fidelity(a) => fidelity(a),
        Command::Exact => exact(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hinv: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn parse_variant(s: &str) -> CliResult<SweepVariant> {
    s.parse().map_err(|e: hinv::Error| CliError::Validation(e.to_string()))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn stem_with(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn characterize(a: CharacterizeArgs) -> CliResult<()> {
    let variants = a.variants.iter().map(|v| parse_variant(v)).collect::<CliResult<Vec<_>>>()?;
    let noise = NoiseConfig::load(a.noise.as_deref())?;
    let ingesting = !a.ingest.is_empty();
    if ingesting && a.ingest.len() != variants.len() {
        return Err(CliError::Validation(format!(
            "{} --ingest file(s) for {} --variant value(s)",
            a.ingest.len(),
            variants.len()
        )));
    }
    if ingesting && (a.sampled || a.analytic) {
        return Err(CliError::Validation("--ingest cannot be combined with --analytic/--sampled".into()));
    }
    let mode = if a.sampled { GridMode::Sampled } else { GridMode::Analytic };
    let seed = match (mode, a.seed) {
        (GridMode::Sampled, None) if !ingesting => {
            return Err(CliError::Validation("--sampled requires --seed".into()));
        }
        (_, s) => s.unwrap_or(0),
    };
    let specs = variants.iter().map(|&v| a.grid.spec(v)).collect::<CliResult<Vec<_>>>()?;

    let maps: Vec<PhaseSpaceMap> = if ingesting {
        a.ingest
            .iter()
            .map(|p| {
                let f = File::open(p).map_err(|e| io_error(p, e))?;
                ingest_grid(f).map_err(|e| io_error(p, e))
            })
            .collect::<CliResult<_>>()?
    } else {
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let s_seed = if specs.len() == 1 { seed } else { hinv::rng::derive_seed(seed, &[i as u64]) };
                run_grid(s, &noise.single_qubit, mode, s_seed).map_err(numerical)
            })
            .collect::<CliResult<_>>()?
    };
    for (spec, map) in specs.iter().zip(&maps) {
        if map.n_points != spec.n_points {
            return Err(CliError::Validation(format!(
                "grid has {} points per axis but --points is {}",
                map.n_points, spec.n_points
            )));
        }
    }

    if !ingesting {
        for (spec, map) in specs.iter().zip(&maps) {
            let path = if specs.len() == 1 { a.out.clone() } else { stem_with(&a.out, &format!("{}.csv", spec.variant)) };
            let mut w = create(&path)?;
            write_grid(&mut w, map).map_err(|e| io_error(&path, e))?;
            w.flush().map_err(|e| io_error(&path, e))?;
        }
    }
    if let Some(plot) = &a.plot {
        let title = format!("{} population, {} reps", specs[0].variant, specs[0].reps);
        write_text(plot, &svg::heatmap(&title, &maps[0]))?;
    }
    if a.fit {
        let data: Vec<_> = maps.iter().zip(&specs).collect();
        let fit = lm_fit_joint(&data, &hinv::gates::SqNoiseParams::zero(), &Bounds::default(), &FitOptions::default())
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if let Some(m) = &fit.message {
            eprintln!("hinv: fit: {m}");
        }
        let path = a.fit_out.clone().unwrap_or_else(|| stem_with(&a.out, "fit.json"));
        write_json(&path, &fit.report())?;
    }
    Ok(())
}

fn drift(a: DriftArgs) -> CliResult<()> {
    let variant = parse_variant(&a.variant)?;
    let spec = a.grid.spec(variant)?;
    let noise = NoiseConfig::load(a.noise.as_deref())?;
    let seed = a.seed.ok_or_else(|| CliError::Validation("drift runs are sampled; --seed is required".into()))?;
    if a.runs == 0 {
        return Err(CliError::Validation("--runs must be ≥ 1".into()));
    }
    if spec.shots == 0 {
        return Err(CliError::Validation("--shots must be ≥ 1".into()));
    }
    let scenario: DriftScenario = a.scenario.into();
    let schedule = drift_schedule(scenario, &noise.single_qubit, a.runs, a.amount, seed)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let series = track_drift(scenario, &schedule, &spec, seed).map_err(numerical)?;

    let mut w = csv::Writer::from_writer(create(&a.out)?);
    let fail = |e: csv::Error| io_error(&a.out, e);
    w.write_record(["run", "epsilon", "phase", "detuning_ratio", "residual_norm"]).map_err(fail)?;
    for p in &series.points {
        let f = &p.fit;
        w.write_record([
            p.run.to_string(),
            format!("{:?}", f.params.epsilon),
            format!("{:?}", f.params.phase),
            format!("{:?}", f.params.detuning_ratio),
            format!("{:?}", f.residual_norm),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| io_error(&a.out, e))?;

    if let Some(plot) = &a.plot {
        let line = |label: &str, pick: fn(&hinv::gates::SqNoiseParams) -> f64, truth: bool| Series {
            label: label.to_string(),
            points: series
                .points
                .iter()
                .map(|p| (p.run as f64, pick(if truth { &p.truth } else { &p.fit.params })))
                .collect(),
            style: if truth { Style::Line } else { Style::Points },
        };
        let all = [
            line("epsilon fit", |p| p.epsilon, false),
            line("epsilon true", |p| p.epsilon, true),
            line("phase fit", |p| p.phase, false),
            line("phase true", |p| p.phase, true),
            line("detuning fit", |p| p.detuning_ratio, false),
            line("detuning true", |p| p.detuning_ratio, true),
        ];
        write_text(plot, &svg::plot(&format!("drift: {scenario}"), "run", "parameter", &all))?;
    }
    Ok(())
}

fn write_landscape(path: &Path, points: &[LandscapePoint]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let fail = |e: csv::Error| io_error(path, e);
    w.write_record(["alpha_rad", "energy_hartree", "mode", "mitigation", "purified", "shots"]).map_err(fail)?;
    for p in points {
        w.write_record([
            format!("{:?}", p.alpha),
            format!("{:?}", p.energy),
            mode_label(p.mode).to_string(),
            p.mitigation.name().to_string(),
            p.purified.to_string(),
            p.shots.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn mode_label(m: CompileMode) -> &'static str {
    match m {
        CompileMode::Default => "default",
        CompileMode::HiddenInverse => "hi",
    }
}

fn vqe(a: VqeArgs) -> CliResult<()> {
    let noise = NoiseConfig::load(a.ms_noise.as_deref())?;
    if !a.inject_rotation.is_finite() {
        return Err(CliError::Validation("--inject-rotation must be finite".into()));
    }
    if a.alphas == 0 {
        return Err(CliError::Validation("--alphas must be ≥ 1".into()));
    }
    let mitigation = match a.mitigation {
        MitigationArg::None => Mitigation::None,
        MitigationArg::Rc => Mitigation::Rc,
    };
    if mitigation == Mitigation::Rc && (a.rc_circuits == 0 || a.rc_circuits > 256) {
        return Err(CliError::Validation("--rc-circuits must lie in 1..=256".into()));
    }
    if mitigation == Mitigation::Rc && !a.shots.is_multiple_of(a.rc_circuits as u64) {
        return Err(CliError::Validation(format!("--rc-circuits {} does not divide --shots {}", a.rc_circuits, a.shots)));
    }
    let seed = match (a.shots, a.seed) {
        (0, s) => s.unwrap_or(0),
        (_, Some(s)) => s,
        (_, None) => return Err(CliError::Validation("sampled landscapes (--shots > 0) require --seed".into())),
    };
    let mode = match a.mode {
        ModeArg::Default => CompileMode::Default,
        ModeArg::Hi => CompileMode::HiddenInverse,
    };
    let ms = MsNoiseParams { overrotation: noise.ms.overrotation + a.inject_rotation, ..noise.ms };
    // VQE singles are ideal; all noise sits on the MS gate.
    let sq = hinv::gates::SqNoiseParams::zero();
    let alphas = alpha_grid(a.alphas);
    let keep = |pts: Vec<LandscapePoint>| -> Vec<LandscapePoint> {
        pts.into_iter().filter(|p| a.purify || !p.purified).collect()
    };

    let mut points = Vec::new();
    if a.shots > 0 {
        let spec = LandscapeSpec { mode, mitigation, shots: a.shots, rc_circuits: a.rc_circuits };
        points.extend(keep(landscape(&alphas, &spec, &sq, &ms, seed).map_err(numerical)?));
    }
    let exact_spec = LandscapeSpec { mode, mitigation, shots: 0, rc_circuits: 256 };
    let analytic = keep(landscape(&alphas, &exact_spec, &sq, &ms, seed).map_err(numerical)?);
    points.extend(analytic.iter().copied());
    write_landscape(&a.out, &points)?;

    if let Some(plot) = &a.plot {
        let ground = exact_ground_energy(&h2_hamiltonian()).map_err(numerical)?;
        let mut series = Vec::new();
        for purified in [false, true] {
            let tag = if purified { "purified" } else { "raw" };
            let pick = |shots_nonzero: bool| -> Vec<(f64, f64)> {
                points
                    .iter()
                    .filter(|p| p.purified == purified && (p.shots > 0) == shots_nonzero)
                    .map(|p| (p.alpha, p.energy))
                    .collect()
            };
            let (sampled, exact) = (pick(true), pick(false));
            if !sampled.is_empty() {
                series.push(Series { label: format!("{tag} shots"), points: sampled, style: Style::Points });
            }
            if !exact.is_empty() {
                series.push(Series { label: format!("{tag} simulated"), points: exact, style: Style::Line });
            }
        }
        series.push(Series {
            label: "exact ground".into(),
            points: vec![(alphas[0], ground), (alphas[alphas.len() - 1], ground)],
            style: Style::Line,
        });
        let title = format!("VQE landscape ({}, {})", mode_label(mode), mitigation.name());
        write_text(plot, &svg::plot(&title, "alpha (rad)", "energy (Hartree)", &series))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FidelityReport {
    theta_rad: f64,
    avg_gate_fidelity: f64,
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::Numerical(e.to_string()))
}

fn fidelity(a: FidelityArgs) -> CliResult<()> {
    let ms = match a.preset {
        Some(Preset::FullCooling) => MsNoiseParams::full_cooling(),
        Some(Preset::InjectedUnderrotation) => MsNoiseParams::injected_underrotation(),
        Some(Preset::ReducedCooling) => MsNoiseParams::reduced_cooling(),
        None => NoiseConfig::load(a.ms_noise.as_deref())?.ms,
    };
    let f = ms_gate_fidelity(PI / 2.0, &ms).map_err(numerical)?;
    print_json(&FidelityReport { theta_rad: PI / 2.0, avg_gate_fidelity: f })
}

#[derive(Serialize)]
struct ExactReport {
    ground_energy_hartree: f64,
}

fn exact() -> CliResult<()> {
    let e = exact_ground_energy(&h2_hamiltonian()).map_err(numerical)?;
    print_json(&ExactReport { ground_energy_hartree: e })
}
