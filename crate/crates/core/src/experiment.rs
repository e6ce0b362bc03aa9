//! Experiment runner: presets, memory plan, CSV rows and JSON sidecar.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::biunitary::{Gate, UnitaryErrorBasis};
use crate::circuit::{brickwall_evolve, CircuitSpec, GateAssignment, Layout};
use crate::ensemble::{delta_k, project_ensemble, sym_dim, MeasurementScheme};
use crate::error::{Error, Result};
use crate::io::{GateSource, MpsFile, UebFile};
use crate::states::{computational_product_state, solvable_mps_state, SolvableMps, StateVector};

pub const CSV_HEADER: [&str; 13] = [
    "experiment_id",
    "preset",
    "gate",
    "scheme",
    "N_A",
    "N_B",
    "q",
    "t",
    "k",
    "delta",
    "dropped_mass",
    "seed",
    "wall_ms",
];

/// Default memory budget in MiB.
pub const DEFAULT_BUDGET_MB: u64 = 4096;

/// Slack allowed in the range and monotonicity checks of emitted rows.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig1,
    Fig2,
    #[default]
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Custom => "custom",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::Config(format!("unknown preset \"{s}\""))),
        }
    }
}

/// `computational` (all zeros), `computational:<digits>`, `bell_pairs` or `mps:<path>`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Computational(Option<Vec<usize>>),
    BellPairs,
    Mps(PathBuf),
}

impl FromStr for InitialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "computational" => Ok(Self::Computational(None)),
            None if s == "bell_pairs" => Ok(Self::BellPairs),
            Some(("computational", digits)) => digits
                .chars()
                .map(|c| {
                    c.to_digit(36)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::Config(format!("bad computational digit '{c}'")))
                })
                .collect::<Result<Vec<_>>>()
                .map(|z| Self::Computational(Some(z))),
            Some(("mps", path)) => Ok(Self::Mps(PathBuf::from(path))),
            _ => Err(Error::Config(format!("unknown initial state \"{s}\""))),
        }
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Computational(None) => write!(f, "computational"),
            Self::Computational(Some(z)) => {
                write!(f, "computational:")?;
                z.iter().try_for_each(|d| {
                    write!(f, "{}", std::char::from_digit(*d as u32, 36).unwrap_or('?'))
                })
            }
            Self::BellPairs => write!(f, "bell_pairs"),
            Self::Mps(p) => write!(f, "mps:{}", p.display()),
        }
    }
}

/// `computational`, `bell` (generalized Pauli basis) or `ueb:<path>`.
#[derive(Clone, Debug, PartialEq)]
pub enum SchemeSpec {
    Computational,
    Bell,
    UebFile(PathBuf),
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "computational" => Ok(Self::Computational),
            None if s == "bell" => Ok(Self::Bell),
            Some(("ueb", path)) => Ok(Self::UebFile(PathBuf::from(path))),
            _ => Err(Error::Config(format!("unknown measurement scheme \"{s}\""))),
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Computational => write!(f, "computational"),
            Self::Bell => write!(f, "bell"),
            Self::UebFile(p) => write!(f, "ueb:{}", p.display()),
        }
    }
}

fn default_n_a() -> usize {
    4
}

fn default_n_b() -> usize {
    12
}

fn default_q() -> usize {
    2
}

fn default_k_max() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment_id: Option<String>,
    #[serde(default)]
    pub preset: Preset,
    #[serde(rename = "N_A", default = "default_n_a")]
    pub n_a: usize,
    #[serde(rename = "N_B", default = "default_n_b")]
    pub n_b: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<usize>,
    /// Explicit list of times; overrides `t_min..=t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<usize>>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement_offset: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_budget_mb: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Preset::Custom)
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            experiment_id: None,
            preset,
            n_a: default_n_a(),
            n_b: default_n_b(),
            q: default_q(),
            t_min: None,
            t_max: None,
            times: None,
            k_max: default_k_max(),
            gate: None,
            initial: None,
            scheme: None,
            layout: None,
            measurement_offset: None,
            seed: 0,
            output: None,
            memory_budget_mb: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn id(&self) -> String {
        self.experiment_id
            .clone()
            .unwrap_or_else(|| self.preset.name().to_string())
    }

    /// SHA-256 of the canonical JSON of the configuration without its output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let json = serde_json::to_string(&c).expect("config serialises");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn time_points(&self) -> Vec<usize> {
        if let Some(t) = &self.times {
            let mut t = t.clone();
            t.sort_unstable();
            t.dedup();
            return t;
        }
        let t_max = self.t_max.unwrap_or(match self.preset {
            Preset::Fig1 => 6,
            Preset::Fig2 => 5,
            Preset::Custom => 3,
        });
        let t_min = self.t_min.unwrap_or(1).min(t_max);
        (t_min..=t_max).collect()
    }
}

/// One gate/initial-state/measurement combination evolved over time.
#[derive(Clone, Debug)]
pub struct Series {
    pub gate_id: String,
    pub gate: Gate,
    pub initial: InitialSpec,
    pub scheme_spec: SchemeSpec,
    pub scheme: MeasurementScheme,
    pub layout: Layout,
}

impl Series {
    pub fn scheme_label(&self) -> String {
        self.scheme_spec.to_string()
    }
}

fn kim_preset_id() -> String {
    let a = std::f64::consts::FRAC_PI_4;
    format!("kim:{a},{a},0.5,0.5")
}

fn build_scheme(spec: &SchemeSpec, q: usize, offset: usize) -> Result<MeasurementScheme> {
    match spec {
        SchemeSpec::Computational => Ok(MeasurementScheme::Computational),
        SchemeSpec::Bell => Ok(MeasurementScheme::Ueb {
            basis: UnitaryErrorBasis::generalized_pauli(q)?,
            offset,
        }),
        SchemeSpec::UebFile(path) => {
            let file: UebFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            Ok(MeasurementScheme::Ueb {
                basis: UnitaryErrorBasis::new(file.to_members()?, 1e-10)?,
                offset,
            })
        }
    }
}

fn series(
    cfg: &ExperimentConfig,
    gate_id: &str,
    initial: InitialSpec,
    scheme: SchemeSpec,
    layout: Layout,
    offset: usize,
) -> Result<Series> {
    let gate = gate_id.parse::<GateSource>()?.build()?;
    if gate.q() != cfg.q {
        return Err(Error::Config(format!(
            "gate {gate_id} acts on dimension {}, experiment has q = {}",
            gate.q(),
            cfg.q
        )));
    }
    Ok(Series {
        gate_id: gate_id.to_string(),
        scheme: build_scheme(&scheme, cfg.q, offset)?,
        gate,
        initial,
        scheme_spec: scheme,
        layout,
    })
}

/// Expands a configuration into its series.
///
/// Pair-prepared initial states default to the layout whose first layer is
/// offset from the prepared pairs, with measured pairs offset from the
/// last layer.
pub fn resolve_series(cfg: &ExperimentConfig) -> Result<Vec<Series>> {
    let parse_initial = |d: &str| cfg.initial.as_deref().unwrap_or(d).parse::<InitialSpec>();
    let parse_scheme = |d: &str| cfg.scheme.as_deref().unwrap_or(d).parse::<SchemeSpec>();
    match cfg.preset {
        Preset::Fig1 => {
            let kim = cfg.gate.clone().unwrap_or_else(kim_preset_id);
            let haar = format!("haar:{}:{}", cfg.q, cfg.seed);
            let layout = cfg.layout.unwrap_or(Layout::OddFirst);
            let offset = cfg.measurement_offset.unwrap_or(0);
            [kim, haar]
                .iter()
                .map(|g| {
                    series(
                        cfg,
                        g,
                        parse_initial("computational")?,
                        parse_scheme("computational")?,
                        layout,
                        offset,
                    )
                })
                .collect()
        }
        Preset::Fig2 => {
            let gate = cfg
                .gate
                .clone()
                .unwrap_or_else(|| "sample_dual_unitary".to_string());
            let layout = cfg.layout.unwrap_or(Layout::EvenFirst);
            let offset = cfg.measurement_offset.unwrap_or(1);
            Ok(vec![
                series(
                    cfg,
                    &gate,
                    InitialSpec::BellPairs,
                    SchemeSpec::Bell,
                    layout,
                    offset,
                )?,
                series(
                    cfg,
                    &gate,
                    InitialSpec::Computational(None),
                    SchemeSpec::Computational,
                    layout,
                    offset,
                )?,
            ])
        }
        Preset::Custom => {
            let gate = cfg
                .gate
                .clone()
                .ok_or_else(|| Error::Config("custom experiments need a gate".into()))?;
            let initial = parse_initial("computational")?;
            let paired = !matches!(initial, InitialSpec::Computational(_));
            let layout = cfg.layout.unwrap_or(if paired {
                Layout::EvenFirst
            } else {
                Layout::OddFirst
            });
            let offset = cfg.measurement_offset.unwrap_or(usize::from(paired));
            Ok(vec![series(
                cfg,
                &gate,
                initial,
                parse_scheme("computational")?,
                layout,
                offset,
            )?])
        }
    }
}

pub fn initial_state(spec: &InitialSpec, n: usize, q: usize) -> Result<StateVector> {
    match spec {
        InitialSpec::Computational(None) => computational_product_state(n, q, &vec![0; n]),
        InitialSpec::Computational(Some(z)) => {
            if z.len() != n {
                return Err(Error::Config(format!(
                    "computational state has {} digits for {n} sites",
                    z.len()
                )));
            }
            computational_product_state(n, q, z)
        }
        InitialSpec::BellPairs => Ok(solvable_mps_state(&SolvableMps::bell(q)?, n, None)?.state),
        InitialSpec::Mps(path) => {
            let file: MpsFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let mps = file.to_mps()?;
            if mps.q() != q {
                return Err(Error::Config(format!(
                    "MPS has q = {}, experiment has q = {q}",
                    mps.q()
                )));
            }
            Ok(solvable_mps_state(&mps, n, None)?.state)
        }
    }
}

/// Memory estimate printed before a run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Plan {
    pub series: usize,
    pub times: Vec<usize>,
    pub k_max: usize,
    pub sites: usize,
    pub state_bytes: u64,
    pub ensemble_bytes: u64,
    pub moment_bytes: u64,
    pub peak_bytes: u64,
    pub budget_bytes: u64,
}

impl Plan {
    pub fn fits(&self) -> bool {
        self.peak_bytes <= self.budget_bytes
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mib = |b: u64| b as f64 / (1u64 << 20) as f64;
        writeln!(
            f,
            "plan: {} series, {} sites, t in {:?}, k <= {}",
            self.series, self.sites, self.times, self.k_max
        )?;
        writeln!(f, "  state      {:>10.1} MiB", mib(self.state_bytes))?;
        writeln!(f, "  ensemble   {:>10.1} MiB", mib(self.ensemble_bytes))?;
        writeln!(f, "  moment     {:>10.1} MiB", mib(self.moment_bytes))?;
        write!(
            f,
            "  peak       {:>10.1} MiB of {:.1} MiB budget",
            mib(self.peak_bytes),
            mib(self.budget_bytes)
        )
    }
}

const AMP_BYTES: u64 = 16;

pub fn plan(cfg: &ExperimentConfig) -> Result<Plan> {
    let sites = cfg.n_a + cfg.n_b;
    let pow = |e: usize| -> Result<u64> {
        (cfg.q as u64)
            .checked_pow(e as u32)
            .ok_or(Error::Overflow("Hilbert space dimension"))
    };
    let state = pow(sites)?.saturating_mul(AMP_BYTES);
    let d_a = pow(cfg.n_a)? as usize;
    let sym = if cfg.k_max == 0 {
        0
    } else {
        sym_dim(d_a, cfg.k_max) as u64
    };
    // moment matrix, its eigen workspace and one block of weighted coordinates
    let moment = sym
        .saturating_mul(sym)
        .saturating_mul(AMP_BYTES)
        .saturating_mul(2)
        + sym.saturating_mul(1024).saturating_mul(AMP_BYTES);
    let ensemble = state;
    let peak = state
        .saturating_mul(3)
        .saturating_add(ensemble)
        .saturating_add(moment);
    Ok(Plan {
        series: resolve_series(cfg).map(|s| s.len()).unwrap_or(0),
        times: cfg.time_points(),
        k_max: cfg.k_max,
        sites,
        state_bytes: state,
        ensemble_bytes: ensemble,
        moment_bytes: moment,
        peak_bytes: peak,
        budget_bytes: cfg
            .memory_budget_mb
            .unwrap_or(DEFAULT_BUDGET_MB)
            .saturating_mul(1 << 20),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment_id: String,
    pub preset: String,
    pub gate: String,
    pub scheme: String,
    #[serde(rename = "N_A")]
    pub n_a: usize,
    #[serde(rename = "N_B")]
    pub n_b: usize,
    pub q: usize,
    pub t: usize,
    pub k: usize,
    pub delta: f64,
    pub dropped_mass: f64,
    pub seed: u64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesTiming {
    pub gate: String,
    pub scheme: String,
    pub initial: String,
    pub layout: Layout,
    pub measurement_offset: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub experiment_id: String,
    pub preset: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub library_version: String,
    pub plan: Plan,
    pub series: Vec<SeriesTiming>,
    pub rows: usize,
    pub wall_ms_total: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
    pub sidecar: Sidecar,
}

/// Milliseconds rounded to microseconds.
fn elapsed_ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

/// Range and monotonicity checks on the rows of one `(series, t)` block.
pub fn check_rows(rows: &[Row]) -> Result<()> {
    for r in rows {
        if !(r.delta >= -CHECK_TOL && r.delta <= 1.0 + CHECK_TOL) {
            return Err(Error::Check(format!(
                "delta = {} outside [0, 1] for gate {}, scheme {}, t = {}, k = {}",
                r.delta, r.gate, r.scheme, r.t, r.k
            )));
        }
    }
    for w in rows.windows(2) {
        if w[1].delta < w[0].delta - CHECK_TOL {
            return Err(Error::Check(format!(
                "delta decreases from k = {} ({}) to k = {} ({}) for gate {}, scheme {}, t = {}",
                w[0].k, w[0].delta, w[1].k, w[1].delta, w[0].gate, w[0].scheme, w[0].t
            )));
        }
    }
    Ok(())
}

/// Runs every series, calling `progress` after each row.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(&Row),
) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let plan = plan(cfg)?;
    if !plan.fits() {
        return Err(Error::CapExceeded {
            what: "memory budget (bytes)",
            needed: plan.peak_bytes as usize,
            cap: plan.budget_bytes as usize,
        });
    }
    if cfg.n_a == 0 || cfg.n_b == 0 {
        return Err(Error::Config("N_A and N_B must be positive".into()));
    }
    let n = cfg.n_a + cfg.n_b;
    let times = cfg.time_points();
    let all = resolve_series(cfg)?;
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for s in &all {
        let series_start = Instant::now();
        let mut state = initial_state(&s.initial, n, cfg.q)?;
        let step = CircuitSpec {
            n,
            q: cfg.q,
            t: 1,
            layout: s.layout,
            gates: GateAssignment::Floquet(s.gate.clone()),
            seed: cfg.seed,
        };
        let mut now = 0;
        for &t in &times {
            while now < t {
                state = brickwall_evolve(&state, &step)?;
                now += 1;
            }
            let ens = project_ensemble(&state, cfg.n_a, &s.scheme)?;
            let mut block = Vec::with_capacity(cfg.k_max);
            for k in 1..=cfg.k_max {
                let row_start = Instant::now();
                let delta = delta_k(&ens, k)?;
                let row = Row {
                    experiment_id: cfg.id(),
                    preset: cfg.preset.name().to_string(),
                    gate: s.gate_id.clone(),
                    scheme: s.scheme_label(),
                    n_a: cfg.n_a,
                    n_b: cfg.n_b,
                    q: cfg.q,
                    t,
                    k,
                    delta,
                    dropped_mass: ens.dropped_mass,
                    seed: cfg.seed,
                    wall_ms: elapsed_ms(row_start),
                };
                progress(&row);
                block.push(row);
            }
            check_rows(&block)?;
            rows.extend(block);
        }
        timings.push(SeriesTiming {
            gate: s.gate_id.clone(),
            scheme: s.scheme_label(),
            initial: s.initial.to_string(),
            layout: s.layout,
            measurement_offset: match &s.scheme {
                MeasurementScheme::Ueb { offset, .. } => *offset,
                MeasurementScheme::Computational => 0,
            },
            wall_ms: elapsed_ms(series_start),
        });
    }
    let sidecar = Sidecar {
        experiment_id: cfg.id(),
        preset: cfg.preset.name().to_string(),
        config: cfg.clone(),
        config_hash: cfg.hash(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        plan,
        series: timings,
        rows: rows.len(),
        wall_ms_total: elapsed_ms(start),
    };
    Ok(ExperimentOutput { rows, sidecar })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with(cfg, |_| {})
}

/// CSV text with the fixed header, written even when there are no rows.
pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

/// Sidecar path next to a CSV file.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV and its JSON sidecar.
pub fn write_outputs(out: &ExperimentOutput, csv_path: &Path) -> Result<()> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(csv_path, to_csv(&out.rows)?)?;
    std::fs::write(
        sidecar_path(csv_path),
        serde_json::to_string_pretty(&out.sidecar)?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(preset: Preset) -> ExperimentConfig {
        ExperimentConfig {
            n_a: 2,
            n_b: 4,
            k_max: 3,
            t_max: Some(2),
            ..ExperimentConfig::preset(preset)
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "computational".parse::<InitialSpec>().unwrap(),
            InitialSpec::Computational(None)
        );
        let z: InitialSpec = "computational:0110".parse().unwrap();
        assert_eq!(z, InitialSpec::Computational(Some(vec![0, 1, 1, 0])));
        assert_eq!(z.to_string(), "computational:0110");
        assert_eq!(
            "bell_pairs".parse::<InitialSpec>().unwrap(),
            InitialSpec::BellPairs
        );
        assert!("bogus".parse::<InitialSpec>().is_err());
        assert_eq!("bell".parse::<SchemeSpec>().unwrap(), SchemeSpec::Bell);
        assert!("fig3".parse::<Preset>().is_err());
    }

    #[test]
    fn presets_expand() {
        let s = resolve_series(&small(Preset::Fig1)).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s[0].gate.is_dual_unitary(1e-10));
        assert!(!s[1].gate.is_dual_unitary(1e-3));
        let s = resolve_series(&small(Preset::Fig2)).unwrap();
        assert_eq!(s[0].scheme_label(), "bell");
        assert_eq!(s[1].scheme_label(), "computational");
        assert!(resolve_series(&small(Preset::Custom)).is_err());
    }

    #[test]
    fn config_json_and_hash() {
        let json = r#"{"preset": "fig1", "N_A": 2, "N_B": 4, "t_max": 2, "k_max": 2, "seed": 3}"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        assert_eq!((cfg.n_a, cfg.n_b, cfg.seed), (2, 4, 3));
        let mut other = cfg.clone();
        other.output = Some("x.csv".into());
        assert_eq!(cfg.hash(), other.hash());
        other.seed = 4;
        assert_ne!(cfg.hash(), other.hash());
        assert!(ExperimentConfig::from_json(r#"{"N_C": 1}"#).is_err());
    }

    #[test]
    fn time_points() {
        let mut cfg = small(Preset::Custom);
        assert_eq!(cfg.time_points(), vec![1, 2]);
        cfg.t_max = Some(0);
        assert_eq!(cfg.time_points(), vec![0]);
        cfg.times = Some(vec![5, 2, 2]);
        assert_eq!(cfg.time_points(), vec![2, 5]);
    }

    #[test]
    fn run_small_preset() {
        let out = run_experiment(&small(Preset::Fig1)).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * 3);
        assert!(out.rows.iter().all(|r| (0.0..=1.0).contains(&r.delta)));
        let csv = to_csv(&out.rows).unwrap();
        assert!(csv.starts_with(
            "experiment_id,preset,gate,scheme,N_A,N_B,q,t,k,delta,dropped_mass,seed,wall_ms\n"
        ));
        assert_eq!(csv.lines().count(), 13);
        assert_eq!(to_csv(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn initial_state_sanity_row() {
        let cfg = ExperimentConfig {
            gate: Some("cat_map:2".into()),
            t_max: Some(0),
            ..small(Preset::Custom)
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 3);
        assert!(out.rows.iter().all(|r| r.t == 0));
        // a product state leaves a pure product state on A
        assert!(out.rows[0].delta > 0.4);
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = ExperimentConfig {
            memory_budget_mb: Some(0),
            ..small(Preset::Fig1)
        };
        assert!(matches!(
            run_experiment(&cfg),
            Err(Error::CapExceeded { .. })
        ));
        assert!(plan(&small(Preset::Fig1)).unwrap().fits());
    }

    #[test]
    fn checks_catch_violations() {
        let row = |k, delta| Row {
            experiment_id: "x".into(),
            preset: "custom".into(),
            gate: "g".into(),
            scheme: "computational".into(),
            n_a: 1,
            n_b: 1,
            q: 2,
            t: 1,
            k,
            delta,
            dropped_mass: 0.0,
            seed: 0,
            wall_ms: 0.0,
        };
        assert!(check_rows(&[row(1, 0.1), row(2, 0.2)]).is_ok());
        assert!(check_rows(&[row(1, 0.3), row(2, 0.2)]).is_err());
        assert!(check_rows(&[row(1, 1.5)]).is_err());
    }
}
