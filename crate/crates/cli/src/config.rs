//! JSON run configuration: strict schema, defaults, validation, and a
//! canonical normalized form.

use fraceig::{Error, Result};
use serde::{Deserialize, Serialize};

/// Experiment tags accepted on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Thm11,
    Cor11,
    Barta,
    Thm12,
    Thm13,
    FaberKrahn,
    Chiti,
    Obstacle,
    McCrosscheck,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Thm11,
        Experiment::Cor11,
        Experiment::Barta,
        Experiment::Thm12,
        Experiment::Thm13,
        Experiment::FaberKrahn,
        Experiment::Chiti,
        Experiment::Obstacle,
        Experiment::McCrosscheck,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::Thm11 => "thm11",
            Experiment::Cor11 => "cor11",
            Experiment::Barta => "barta",
            Experiment::Thm12 => "thm12",
            Experiment::Thm13 => "thm13",
            Experiment::FaberKrahn => "faber_krahn",
            Experiment::Chiti => "chiti",
            Experiment::Obstacle => "obstacle",
            Experiment::McCrosscheck => "mc_crosscheck",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Experiment::Thm11 => "maximizer distance vs potential size over a convex family",
            Experiment::Cor11 => "nonexistence threshold on a convex domain",
            Experiment::Barta => "variational eigenvalue bound from positive trials",
            Experiment::Thm12 => "simply connected 2D maximizer distance (alpha = 2)",
            Experiment::Thm13 => "interior fatness of the domain at the maximizer",
            Experiment::FaberKrahn => "equal-measure eigenvalue comparison against the ball",
            Experiment::Chiti => "reverse Holder ratios of the principal eigenfunction",
            Experiment::Obstacle => "obstacle placement vs the maximizer set",
            Experiment::McCrosscheck => "alpha-stable Monte Carlo vs spectral cross-checks",
        }
    }

    /// Uses a domain family (vs a single domain).
    pub fn takes_family(&self) -> bool {
        matches!(
            self,
            Experiment::Thm11 | Experiment::Thm12 | Experiment::FaberKrahn | Experiment::Chiti
        )
    }
}

/// Raw wire schema: unknown keys rejected, everything optional except the
/// experiment tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v_sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obstacle_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    placement_grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    placement_span: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<OutputFormat> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::InvalidConfig(format!(
                "format must be json|csv|both, got {other:?}"
            ))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Both => "both",
        }
    }
}

/// Fully resolved configuration: every field concrete.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub alpha: f64,
    pub family: String,
    pub domain: Option<serde_json::Value>,
    pub h: f64,
    pub dt: f64,
    pub n: usize,
    pub horizon: f64,
    pub seed: u64,
    pub tol: f64,
    pub eps: f64,
    pub v_sup: f64,
    pub obstacle_radius: f64,
    pub placement_grid: usize,
    pub placement_span: f64,
    pub format: OutputFormat,
    pub threads: Option<usize>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

/// Parse and validate a JSON configuration, filling defaults
/// (h = 1/64, dt = 1e-3, n = 1e5, seed = 42). Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| Error::InvalidConfig(format!("config schema violation: {e}")))?;
    let experiment = Experiment::ALL
        .into_iter()
        .find(|e| e.tag() == raw.experiment)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment {:?}", raw.experiment)))?;

    let alpha = raw.alpha.unwrap_or(1.0);
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidConfig(format!("alpha out of range: {alpha}")));
    }
    let default_family = match experiment {
        Experiment::Thm12 => "simply_connected",
        Experiment::FaberKrahn => "equal_measure",
        _ => "convex",
    };
    let family = raw.family.unwrap_or_else(|| default_family.to_string());
    fraceig::experiments::FamilySpec::parse(&family)?;
    if experiment == Experiment::Thm12 && alpha != 2.0 {
        return Err(Error::InvalidConfig(
            "thm12 is a local (alpha = 2) statement; drop alpha or set it to 2".into(),
        ));
    }

    let cfg = RunConfig {
        experiment,
        alpha,
        family,
        domain: raw.domain,
        h: positive("h", raw.h.unwrap_or(1.0 / 64.0))?,
        dt: positive("dt", raw.dt.unwrap_or(1e-3))?,
        n: raw.n.unwrap_or(100_000),
        horizon: positive("horizon", raw.horizon.unwrap_or(1.0))?,
        seed: raw.seed.unwrap_or(42),
        tol: positive("tol", raw.tol.unwrap_or(1e-8))?,
        eps: raw.eps.unwrap_or(0.5),
        v_sup: raw.v_sup.unwrap_or(0.0),
        obstacle_radius: positive("obstacle_radius", raw.obstacle_radius.unwrap_or(0.15))?,
        placement_grid: raw.placement_grid.unwrap_or(9),
        placement_span: positive("placement_span", raw.placement_span.unwrap_or(0.6))?,
        format: match raw.format {
            Some(s) => OutputFormat::parse(&s)?,
            None => OutputFormat::Both,
        },
        threads: raw.threads,
    };
    if cfg.n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Error::InvalidConfig(format!("eps out of range: {}", cfg.eps)));
    }
    if cfg.placement_grid == 0 {
        return Err(Error::InvalidConfig("placement_grid must be at least 1".into()));
    }
    if cfg.v_sup < 0.0 {
        return Err(Error::InvalidConfig(format!("v_sup must be nonnegative, got {}", cfg.v_sup)));
    }
    Ok(cfg)
}

/// Canonical JSON for a resolved configuration; `parse(emit(c)) == c`.
pub fn emit_config(cfg: &RunConfig) -> String {
    let raw = RawConfig {
        experiment: cfg.experiment.tag().to_string(),
        alpha: Some(cfg.alpha),
        family: Some(cfg.family.clone()),
        domain: cfg.domain.clone(),
        h: Some(cfg.h),
        dt: Some(cfg.dt),
        n: Some(cfg.n),
        horizon: Some(cfg.horizon),
        seed: Some(cfg.seed),
        tol: Some(cfg.tol),
        eps: Some(cfg.eps),
        v_sup: Some(cfg.v_sup),
        obstacle_radius: Some(cfg.obstacle_radius),
        placement_grid: Some(cfg.placement_grid),
        placement_span: Some(cfg.placement_span),
        format: Some(cfg.format.tag().to_string()),
        threads: cfg.threads,
    };
    serde_json::to_string_pretty(&raw).expect("config serialization cannot fail")
}
