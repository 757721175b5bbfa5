//! Experiment configuration files.
//!
//! A config is a TOML document with an optional top-level `command` and the
//! tables `[physics]`, `[mc]`, `[analysis]`, `[io]` and `[verify]`. Every
//! key has a default; unknown keys are rejected. Validation errors name the
//! offending field and, when it came from a file, its line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toricdiag_core::analysis::{CollapseOptions, CrossingOptions};
use toricdiag_core::mc::{McConfig, ModelKind, Start};
use toricdiag_core::{ErrorModel, LoopKind};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Moments,
    Threshold,
    Negativity,
    CoherentInfo,
    RelativeEntropy,
    Verify,
    Collapse,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Threshold => "threshold",
            Command::Negativity => "negativity",
            Command::CoherentInfo => "coherent-info",
            Command::RelativeEntropy => "relative-entropy",
            Command::Verify => "verify",
            Command::Collapse => "collapse",
        }
    }
}

/// Error rates, either listed or as an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    List(Vec<f64>),
    Range(PRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl PGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            PGrid::List(v) => v.clone(),
            PGrid::Range(r) if r.points == 1 => vec![r.start],
            PGrid::Range(r) => (0..r.points)
                .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.points - 1) as f64)
                .collect(),
        }
    }
}

/// Which channels act with rate `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorType {
    Phase,
    BitFlip,
    Symmetric,
}

impl ErrorType {
    pub fn model(self, p: f64) -> CliResult<ErrorModel> {
        Ok(match self {
            ErrorType::Phase => ErrorModel::phase(p)?,
            ErrorType::BitFlip => ErrorModel::bit_flip(p)?,
            ErrorType::Symmetric => ErrorModel::symmetric(p)?,
        })
    }

    /// Loop kinds carrying a non-trivial tension.
    pub fn weighted_kinds(self) -> Vec<LoopKind> {
        match self {
            ErrorType::Phase => vec![LoopKind::X],
            ErrorType::BitFlip => vec![LoopKind::Z],
            ErrorType::Symmetric => vec![LoopKind::X, LoopKind::Z],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    pub n: u32,
    pub p: PGrid,
    pub errors: ErrorType,
    pub method: Method,
    /// Correlator separations (relative entropy).
    pub separations: Vec<usize>,
    /// Even Rényi order `2n` of the negativity.
    pub order: u32,
    /// Top-left plaquette of the Kitaev–Preskill block.
    pub kp_origin: [usize; 2],
    /// Per-flavor twists along the two cycles (coherent information);
    /// defaults to every flavor twisted along the first cycle only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect_l1: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect_l2: Option<Vec<u8>>,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            l: vec![8],
            n: 2,
            p: PGrid::List(vec![0.1]),
            errors: ErrorType::Phase,
            method: Method::Mc,
            separations: vec![1, 2, 3, 4],
            order: 4,
            kp_origin: [2, 2],
            defect_l1: None,
            defect_l2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub sweeps_thermalize: u64,
    pub sweeps_measure: u64,
    pub measure_interval: u64,
    pub chains: usize,
    pub seed: u64,
    pub model: ModelKind,
    pub start: Start,
    /// Jackknife blocks per chain.
    pub blocks: usize,
    /// Exchange configurations between neighbouring rates of the p grid.
    pub tempering: bool,
    pub swap_interval: u64,
    pub improved_correlators: bool,
    pub conditional_pinning: bool,
    /// Free-energy perturbation stages; 0 flips one bond per stage.
    pub stages: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        let base = McConfig::new(2, 2, 0.0);
        McSettings {
            sweeps_thermalize: base.sweeps_thermalize,
            sweeps_measure: base.sweeps_measure,
            measure_interval: base.measure_interval,
            chains: 4,
            seed: 0,
            model: ModelKind::Replica,
            start: Start::Cold,
            blocks: base.blocks,
            tempering: false,
            swap_interval: 1,
            improved_correlators: false,
            conditional_pinning: true,
            stages: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    /// Binder ratios and moments averaged over flavor sign flips; unset
    /// means symmetrized for `n ≥ 3`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetrized: Option<bool>,
    /// Restrict crossings and collapses to this range of `p`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Propagate region covariances into `γ_N`.
    pub covariance: bool,
    /// Reuse accumulators from an earlier run instead of sampling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// `[value, tolerance]` the pooled crossing or fitted `p_c` must meet.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_p_c: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_nu: Option<[f64; 2]>,
    pub crossing: CrossingOptions,
    pub collapse: CollapseOptions,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            symmetrized: None,
            window: None,
            covariance: false,
            input: None,
            expect_p_c: None,
            expect_nu: None,
            crossing: CrossingOptions::default(),
            collapse: CollapseOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for IoSettings {
    fn default() -> Self {
        IoSettings {
            out: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub level: Level,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            level: Level::Quick,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub physics: Physics,
    pub mc: McSettings,
    pub analysis: Analysis,
    pub io: IoSettings,
    pub verify: VerifySettings,
}

/// Values given on the command line, applied over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub level: Option<Level>,
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        self.command.unwrap_or(Command::Verify)
    }

    pub fn parse(src: &str, origin: Option<&Path>) -> CliResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| {
            let at = e
                .span()
                .map(|s| format!(":{}", line_at(src, s.start)))
                .unwrap_or_default();
            CliError::Config(format!(
                "{}{at}: {}",
                origin.map_or("config".into(), |p| p.display().to_string()),
                e.message()
            ))
        })?;
        cfg.validate(Some(src), origin)?;
        Ok(cfg)
    }

    /// Reads `path` (or starts from defaults), checks it is meant for
    /// `command`, and applies `overrides`.
    pub fn load(path: Option<&Path>, command: Command, overrides: &Overrides) -> CliResult<Self> {
        let (mut cfg, src) = match path {
            Some(p) => {
                let src = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                (Self::parse(&src, Some(p))?, Some(src))
            }
            None => (ExperimentConfig::default(), None),
        };
        if let Some(c) = cfg.command {
            if c != command {
                let at = src
                    .as_deref()
                    .and_then(|s| locate(s, "", "command"))
                    .map(|l| format!(":{l}"))
                    .unwrap_or_default();
                return Err(CliError::Config(format!(
                    "{}{at}: command: the file is for `{}` but `{}` was requested",
                    path.map_or("config".into(), |p| p.display().to_string()),
                    c.name(),
                    command.name()
                )));
            }
        }
        cfg.command = Some(command);
        if let Some(s) = overrides.seed {
            cfg.mc.seed = s;
        }
        if let Some(c) = overrides.chains {
            cfg.mc.chains = c;
        }
        if let Some(o) = &overrides.out {
            cfg.io.out = Some(o.clone());
        }
        if let Some(f) = overrides.format {
            cfg.io.format = f;
        }
        if let Some(l) = overrides.level {
            cfg.verify.level = l;
        }
        cfg.validate(src.as_deref(), path)?;
        Ok(cfg)
    }

    /// The fully resolved config as TOML.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }

    pub fn validate(&self, src: Option<&str>, origin: Option<&Path>) -> CliResult<()> {
        let fail = |table: &str, key: &str, msg: String| -> CliResult<()> {
            let line = src.and_then(|s| locate(s, table, key));
            let file = origin.map_or("config".into(), |p| p.display().to_string());
            let field = if table.is_empty() {
                key.to_string()
            } else {
                format!("{table}.{key}")
            };
            Err(CliError::Config(match line {
                Some(l) => format!("{file}:{l}: {field}: {msg}"),
                None => format!("{file}: {field}: {msg}"),
            }))
        };
        let ph = &self.physics;
        if ph.l.is_empty() {
            return fail("physics", "L", "at least one lattice size is required".into());
        }
        if let Some(&l) = ph.l.iter().find(|&&l| l < 2) {
            return fail("physics", "L", format!("lattice sizes must be at least 2, got {l}"));
        }
        if ph.l.windows(2).any(|w| w[1] <= w[0]) {
            return fail("physics", "L", "sizes must be strictly increasing".into());
        }
        if ph.n < 2 {
            return fail("physics", "n", format!("Rényi index must be at least 2, got {}", ph.n));
        }
        if let PGrid::Range(r) = &ph.p {
            if r.points == 0 {
                return fail("physics", "p", "a range needs at least one point".into());
            }
            if r.points > 1 && !(r.stop > r.start) {
                return fail("physics", "p", format!(
                    "grid must be strictly increasing (start {} is not below stop {})",
                    r.start, r.stop
                ));
            }
        }
        let ps = ph.p.values();
        if ps.is_empty() {
            return fail("physics", "p", "at least one error rate is required".into());
        }
        if let Some(w) = ps.windows(2).find(|w| !(w[1] > w[0])) {
            return fail("physics", "p", format!(
                "grid must be strictly increasing ({} is followed by {})",
                w[0], w[1]
            ));
        }
        if let Some(p) = ps.iter().find(|p| !(0.0..=0.5).contains(*p)) {
            return fail("physics", "p", format!("error rates must lie in [0, 1/2], got {p}"));
        }
        if ph.order < 4 || ph.order % 2 == 1 {
            return fail("physics", "order", format!("must be even and at least 4, got {}", ph.order));
        }
        if ph.separations.iter().any(|&r| r == 0) {
            return fail("physics", "separations", "separations must be positive".into());
        }
        let flavors = ph.n as usize - 1;
        for (key, d) in [("defect_l1", &ph.defect_l1), ("defect_l2", &ph.defect_l2)] {
            if let Some(d) = d {
                if d.len() != flavors || d.iter().any(|&x| x > 1) {
                    return fail("physics", key, format!(
                        "needs {flavors} entries of 0 or 1"
                    ));
                }
            }
        }
        let mc = &self.mc;
        for (key, v) in [
            ("sweeps_measure", mc.sweeps_measure),
            ("measure_interval", mc.measure_interval),
            ("chains", mc.chains as u64),
            ("blocks", mc.blocks as u64),
            ("swap_interval", mc.swap_interval),
        ] {
            if v == 0 {
                return fail("mc", key, "must be positive".into());
            }
        }
        if mc.tempering && ps.len() < 2 {
            return fail("mc", "tempering", "needs at least two error rates".into());
        }
        if let Some([lo, hi]) = self.analysis.window {
            if !(hi > lo) {
                return fail("analysis", "window", format!("expected lo < hi, got [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    pub fn symmetrized(&self) -> bool {
        self.analysis.symmetrized.unwrap_or(self.physics.n >= 3)
    }

    /// Chain settings for one point.
    pub fn mc_config(&self, l: usize, n: u32, p: f64) -> McConfig {
        let mut c = McConfig::new(l, n, p);
        c.sweeps_thermalize = self.mc.sweeps_thermalize;
        c.sweeps_measure = self.mc.sweeps_measure;
        c.measure_interval = self.mc.measure_interval;
        c.chain_count = self.mc.chains;
        c.seed_base = self.mc.seed;
        c.model = self.mc.model;
        c.start = self.mc.start;
        c.blocks = self.mc.blocks;
        c
    }
}

fn line_at(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[table]` (or as `table.key` at the top level).
pub fn locate(src: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else {
            continue;
        };
        let lhs: String = lhs.chars().filter(|c| !c.is_whitespace()).collect();
        let full = if current.is_empty() {
            lhs.clone()
        } else {
            format!("{current}.{lhs}")
        };
        let want = if table.is_empty() {
            key.to_string()
        } else {
            format!("{table}.{key}")
        };
        if full == want {
            return Some(i + 1);
        }
    }
    None
}
