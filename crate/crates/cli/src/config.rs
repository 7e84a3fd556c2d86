//! Run configuration: TOML parsing, preset merging and validation.
//!
//! A config either names a compiled-in preset and overrides whole sections,
//! or spells out every section itself. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use crb_core::scenario::{preset, IcSpec, Sources};
use crb_core::wnl::{ExpansionOrder, Rho2Variant};
use crb_core::{CaseKind, GridSpec, InitialCondition, PhysParams};
use serde::{Deserialize, Serialize};

/// Default spatial step when a grid gives neither `n_points` nor `dx`.
pub const DEFAULT_DX: f64 = 0.1;
/// Default direct-solver time step.
pub const DEFAULT_DT: f64 = 0.01;
/// Default time step for conservation runs.
pub const DEFAULT_CONSERVATION_DT: f64 = 0.001;

/// Top-level config file.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Base preset; sections below replace the preset's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Output directory (overridden by `--out`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conservation: Option<ConservationCfg>,
}

/// Physical parameters.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamsCfg {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
}

/// Periodic grid on `[−L, L)`; give `n_points` or `dx`.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub half_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
}

/// Time stepping and output times.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeCfg {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

/// Initial data.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCfg {
    Solitary { k1: f64, k2: f64, x0: f64, pedestal: f64 },
    Counter { k1: f64, k2: f64, x0: f64, x1: f64 },
    Cnoidal { f1: f64, f2: f64, f3: f64, x0: f64 },
    Zero,
}

/// Solver selection.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunCfg {
    /// `close` or `distinct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// Expansion orders to emit; all three when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<String>,
    /// `both` or `direct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<String>,
    /// `gamma` (default) or `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<String>,
}

/// Error sweep over `ε`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    pub eps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

/// Conservation monitor settings.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConservationCfg {
    #[serde(default = "default_conservation_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub sample_every: usize,
    /// Samples ignored at each end when matching peaks.
    #[serde(default = "four")]
    pub skip: usize,
}

fn default_conservation_dt() -> f64 {
    DEFAULT_CONSERVATION_DT
}
fn one() -> usize {
    1
}
fn four() -> usize {
    4
}

/// Fully resolved and validated run description.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub name: String,
    pub params: PhysParams,
    pub grid: GridSpec,
    pub ic_spec: IcSpec,
    pub case: CaseKind,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub sources: Sources,
    pub orders: Vec<ExpansionOrder>,
    pub rho2: Rho2Variant,
    pub sweep: Option<SweepCfg>,
    pub conservation: Option<ConservationCfg>,
    pub output_dir: Option<PathBuf>,
    /// The resolved config in file form, for the manifest and `--dump`.
    pub echo: RunConfig,
}

impl Resolved {
    /// Builds the initial data on the resolved grid.
    pub fn initial_condition(&self) -> Result<InitialCondition> {
        self.ic_spec
            .build(&self.params, self.grid)
            .map_err(|e| anyhow!(ConfigError(e.to_string())))
    }
}

/// Marker for errors that map to the configuration exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(ConfigError(msg.into()))
}

/// Reads and parses a config file; TOML errors carry line and column.
pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// Parses config text.
pub fn parse(text: &str) -> std::result::Result<RunConfig, toml::de::Error> {
    toml::from_str(text)
}

/// The config-file form of a compiled-in preset.
pub fn preset_config(name: &str) -> Result<RunConfig> {
    let pr = preset(name).map_err(|e| config_err(e.to_string()))?;
    let p = pr.params;
    let initial = match pr.ic {
        IcSpec::Solitary { k1, k2, x0, pedestal } => InitialCfg::Solitary { k1, k2, x0, pedestal },
        IcSpec::Counter { k1, k2, x0, x1 } => InitialCfg::Counter { k1, k2, x0, x1 },
        IcSpec::Cnoidal { f1, f2, f3, x0 } => InitialCfg::Cnoidal { f1, f2, f3, x0 },
        IcSpec::Zero => InitialCfg::Zero,
    };
    Ok(RunConfig {
        preset: Some(pr.name.to_string()),
        output_dir: None,
        params: Some(ParamsCfg {
            eps: p.eps,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            delta: p.delta,
            c: p.c,
        }),
        grid: Some(GridCfg {
            half_length: pr.grid.half_length(),
            n_points: Some(pr.grid.n_points()),
            dx: None,
        }),
        time: Some(TimeCfg {
            dt: pr.dt,
            t_end: pr.t_end,
            snapshots: pr.snapshots.clone(),
        }),
        initial: Some(initial),
        run: Some(RunCfg {
            case: Some(pr.case.as_str().to_string()),
            orders: Vec::new(),
            sources: Some(
                match pr.sources {
                    Sources::Both => "both",
                    Sources::DirectOnly => "direct",
                }
                .to_string(),
            ),
            rho2: None,
        }),
        sweep: None,
        conservation: None,
    })
}

fn pick<T: Clone>(a: &Option<T>, b: &Option<T>) -> Option<T> {
    a.clone().or_else(|| b.clone())
}

/// Command-line overrides applied after merging.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<String>,
    pub case: Option<String>,
}

/// Merges a config with its base preset, applies overrides and validates.
pub fn resolve(cfg: &RunConfig, ov: &Overrides) -> Result<Resolved> {
    let base = match &cfg.preset {
        Some(name) => preset_config(name)?,
        None => RunConfig::default(),
    };
    let params: ParamsCfg = pick(&cfg.params, &base.params).ok_or_else(|| config_err("missing [params] section"))?;
    let grid: GridCfg = pick(&cfg.grid, &base.grid).ok_or_else(|| config_err("missing [grid] section"))?;
    let time: TimeCfg = pick(&cfg.time, &base.time).ok_or_else(|| config_err("missing [time] section"))?;
    let initial: InitialCfg =
        pick(&cfg.initial, &base.initial).ok_or_else(|| config_err("missing [initial] section"))?;
    let mut run: RunCfg = pick(&cfg.run, &base.run).unwrap_or_default();
    if let Some(c) = &ov.case {
        run.case = Some(c.clone());
    }
    if let Some(o) = &ov.order {
        run.orders = vec![o.clone()];
    }

    let p = PhysParams::new(
        params.eps,
        params.alpha,
        params.beta,
        params.gamma,
        params.delta,
        params.c,
    )
    .map_err(|e| config_err(format!("[params]: {e}")))?;
    let g = match (grid.n_points, grid.dx) {
        (Some(_), Some(_)) => bail!(config_err("[grid]: give either n_points or dx, not both")),
        (Some(n), None) => GridSpec::new(grid.half_length, n),
        (None, dx) => GridSpec::from_spacing(grid.half_length, dx.unwrap_or(DEFAULT_DX)),
    }
    .map_err(|e| config_err(format!("[grid]: {e}")))?;
    if !(time.dt > 0.0 && time.dt.is_finite()) || !(time.t_end > 0.0 && time.t_end.is_finite()) {
        bail!(config_err("[time]: dt and t_end must be positive and finite"));
    }
    let mut snapshots = if time.snapshots.is_empty() {
        vec![0.0, time.t_end]
    } else {
        time.snapshots.clone()
    };
    if snapshots.iter().any(|&t| !(0.0..=time.t_end).contains(&t)) {
        bail!(config_err(format!("[time]: snapshots must lie in [0, {}]", time.t_end)));
    }
    snapshots.sort_by(|a, b| a.total_cmp(b));
    snapshots.dedup();

    let ic_spec = match initial {
        InitialCfg::Solitary { k1, k2, x0, pedestal } => IcSpec::Solitary { k1, k2, x0, pedestal },
        InitialCfg::Counter { k1, k2, x0, x1 } => IcSpec::Counter { k1, k2, x0, x1 },
        InitialCfg::Cnoidal { f1, f2, f3, x0 } => IcSpec::Cnoidal { f1, f2, f3, x0 },
        InitialCfg::Zero => IcSpec::Zero,
    };
    // Build once so bad data surface as config errors; cnoidal data also
    // fix the grid.
    let ic = ic_spec
        .build(&p, g)
        .map_err(|e| config_err(format!("[initial]: {e}")))?;
    let g = ic.grid;

    let case: CaseKind = run
        .case
        .as_deref()
        .ok_or_else(|| config_err("[run].case is required ('close' or 'distinct')"))?
        .parse()
        .map_err(|e: crb_core::CrbError| config_err(format!("[run].case: {e}")))?;
    let orders = if run.orders.is_empty() {
        ExpansionOrder::ALL.to_vec()
    } else {
        run.orders
            .iter()
            .map(|o| o.parse::<ExpansionOrder>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| config_err(format!("[run].orders: {e}")))?
    };
    let sources = match run.sources.as_deref().unwrap_or("both") {
        "both" => Sources::Both,
        "direct" => Sources::DirectOnly,
        other => bail!(config_err(format!(
            "[run].sources: expected 'both' or 'direct', got '{other}'"
        ))),
    };
    let rho2 = match run.rho2.as_deref().unwrap_or("gamma") {
        "gamma" => Rho2Variant::Gamma,
        "delta" => Rho2Variant::Delta,
        other => bail!(config_err(format!(
            "[run].rho2: expected 'gamma' or 'delta', got '{other}'"
        ))),
    };
    if let Some(c) = &cfg.conservation {
        if !(c.dt > 0.0 && c.dt.is_finite()) || c.sample_every == 0 {
            bail!(config_err(
                "[conservation]: dt must be positive and sample_every at least 1"
            ));
        }
    }
    if let Some(s) = &cfg.sweep {
        if s.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            bail!(config_err("[sweep].eps: values must be positive and finite"));
        }
        if s.dt.is_some_and(|dt| !(dt > 0.0 && dt.is_finite())) {
            bail!(config_err("[sweep].dt must be positive and finite"));
        }
    }

    let echo = RunConfig {
        preset: cfg.preset.clone(),
        output_dir: cfg.output_dir.clone(),
        params: Some(params),
        grid: Some(GridCfg {
            half_length: g.half_length(),
            n_points: Some(g.n_points()),
            dx: None,
        }),
        time: Some(TimeCfg {
            dt: time.dt,
            t_end: time.t_end,
            snapshots: snapshots.clone(),
        }),
        initial: Some(initial),
        run: Some(RunCfg {
            case: Some(case.as_str().to_string()),
            orders: orders.iter().map(|o| o.as_str().to_string()).collect(),
            sources: Some(
                match sources {
                    Sources::Both => "both",
                    Sources::DirectOnly => "direct",
                }
                .to_string(),
            ),
            rho2: Some(
                match rho2 {
                    Rho2Variant::Gamma => "gamma",
                    Rho2Variant::Delta => "delta",
                }
                .to_string(),
            ),
        }),
        sweep: cfg.sweep.clone(),
        conservation: cfg.conservation,
    };
    Ok(Resolved {
        name: cfg.preset.clone().unwrap_or_else(|| "custom".to_string()),
        params: p,
        grid: g,
        ic_spec,
        case,
        dt: time.dt,
        t_end: time.t_end,
        snapshots,
        sources,
        orders,
        rho2,
        sweep: cfg.sweep.clone(),
        conservation: cfg.conservation,
        output_dir: cfg.output_dir.clone(),
        echo,
    })
}
