//! Line-oriented `key = value` run configuration with `[section]` headers.
//!
//! The same format serves as input config and as the emitted manifest, so a
//! manifest can be fed back through `--config` to reproduce a run exactly.
//! Unknown keys are errors: a typo must never silently fall back to a
//! default.

use std::fmt;
use std::str::FromStr;

/// Pipeline entry point selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Fit,
    Scale,
    Figure1,
    RlanCheck,
    Snr,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Fit => "fit",
            Subcommand::Scale => "scale",
            Subcommand::Figure1 => "figure1",
            Subcommand::RlanCheck => "rlan-check",
            Subcommand::Snr => "snr",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fit" => Ok(Subcommand::Fit),
            "scale" => Ok(Subcommand::Scale),
            "figure1" => Ok(Subcommand::Figure1),
            "rlan-check" => Ok(Subcommand::RlanCheck),
            "snr" => Ok(Subcommand::Snr),
            other => Err(format!("unknown subcommand `{other}`")),
        }
    }
}

/// Configuration error with the offending line where applicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    UnknownKey { line: usize, section: String, key: String },
    UnknownSection { line: usize, section: String },
    TypeMismatch { line: usize, key: String, expected: &'static str, got: String },
    MissingRequired { key: &'static str },
    Malformed { line: usize, text: String },
    Invalid { key: &'static str, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey { line, section, key } => {
                let loc = if section.is_empty() { String::new() } else { format!(" in [{section}]") };
                write!(f, "line {line}: unknown key `{key}`{loc}")
            }
            ConfigError::UnknownSection { line, section } => {
                write!(f, "line {line}: unknown section [{section}]")
            }
            ConfigError::TypeMismatch { line, key, expected, got } => {
                write!(f, "line {line}: key `{key}` expects {expected}, got `{got}`")
            }
            ConfigError::MissingRequired { key } => write!(f, "missing required key `{key}`"),
            ConfigError::Malformed { line, text } => {
                write!(f, "line {line}: expected `key = value` or `[section]`, got `{text}`")
            }
            ConfigError::Invalid { key, reason } => write!(f, "key `{key}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Model block.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub name: String,
    pub theta: f64,
    pub tau: f64,
    pub sigma: f64,
}

/// Study block (shared by every subcommand; unused keys are simply ignored
/// by subcommands that do not need them).
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub n_ladder: Vec<usize>,
    pub m_exponent: f64,
    pub j: usize,
    pub replicates: usize,
    pub delta_exponent: f64,
    pub t: f64,
    pub remainder_replicates: usize,
    pub m_rule: f64,
    pub share_draws: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            n_ladder: vec![256, 1024, 4096],
            m_exponent: 0.75,
            j: 10,
            replicates: 500,
            delta_exponent: 0.25,
            t: 1.0,
            remainder_replicates: 200,
            m_rule: 0.5,
            share_draws: false,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: String,
    pub model: ModelConfig,
    pub study: StudyConfig,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUT_DIR: &str = "out";

struct Builder {
    subcommand: Option<Subcommand>,
    seed: u64,
    threads: usize,
    out_dir: String,
    model_name: Option<String>,
    theta: Option<f64>,
    tau: f64,
    sigma: f64,
    study: StudyConfig,
}

impl Builder {
    fn new() -> Self {
        Builder {
            subcommand: None,
            seed: DEFAULT_SEED,
            threads: 0,
            out_dir: DEFAULT_OUT_DIR.to_string(),
            model_name: None,
            theta: None,
            tau: 1.0,
            sigma: 1.0,
            study: StudyConfig::default(),
        }
    }
}

fn parse_value<T: FromStr>(
    line: usize,
    key: &str,
    value: &str,
    expected: &'static str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::TypeMismatch {
        line,
        key: key.to_string(),
        expected,
        got: value.to_string(),
    })
}

fn parse_ladder(line: usize, key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    value
        .split(',')
        .map(|part| parse_value::<usize>(line, key, part.trim(), "comma-separated integers"))
        .collect()
}

/// Parse a configuration (or manifest) text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut b = Builder::new();
    let mut section = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|rest| rest.strip_suffix(']')) {
            let name = name.trim();
            match name {
                "model" | "study" | "output" => section = name.to_string(),
                other => {
                    return Err(ConfigError::UnknownSection {
                        line: line_no,
                        section: other.to_string(),
                    })
                }
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed { line: line_no, text: line.to_string() });
        };
        let key = key.trim();
        let value = value.trim();

        match (section.as_str(), key) {
            ("", "subcommand") => {
                b.subcommand = Some(value.parse().map_err(|_| ConfigError::TypeMismatch {
                    line: line_no,
                    key: key.into(),
                    expected: "one of fit|scale|figure1|rlan-check|snr",
                    got: value.into(),
                })?)
            }
            ("", "seed") => b.seed = parse_value(line_no, key, value, "unsigned integer")?,
            ("", "threads") => b.threads = parse_value(line_no, key, value, "unsigned integer")?,
            ("model", "name") => b.model_name = Some(value.to_string()),
            ("model", "theta") => b.theta = Some(parse_value(line_no, key, value, "real number")?),
            ("model", "tau") => b.tau = parse_value(line_no, key, value, "real number")?,
            ("model", "sigma") => b.sigma = parse_value(line_no, key, value, "real number")?,
            ("study", "n_ladder") => b.study.n_ladder = parse_ladder(line_no, key, value)?,
            ("study", "m_exponent") => {
                b.study.m_exponent = if value == "inf" {
                    f64::INFINITY
                } else {
                    parse_value(line_no, key, value, "real number or `inf`")?
                }
            }
            ("study", "j") => b.study.j = parse_value(line_no, key, value, "unsigned integer")?,
            ("study", "replicates") => {
                b.study.replicates = parse_value(line_no, key, value, "unsigned integer")?
            }
            ("study", "delta_exponent") => {
                b.study.delta_exponent = parse_value(line_no, key, value, "0.25 or 0.5")?
            }
            ("study", "t") => b.study.t = parse_value(line_no, key, value, "real number")?,
            ("study", "remainder_replicates") => {
                b.study.remainder_replicates =
                    parse_value(line_no, key, value, "unsigned integer")?
            }
            ("study", "m_rule") => {
                b.study.m_rule = if value == "inf" {
                    f64::INFINITY
                } else {
                    parse_value(line_no, key, value, "real number or `inf`")?
                }
            }
            ("study", "share_draws") => {
                b.study.share_draws = parse_value(line_no, key, value, "true or false")?
            }
            ("output", "dir") => b.out_dir = value.to_string(),
            (_, _) => {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    section: section.clone(),
                    key: key.to_string(),
                })
            }
        }
    }

    let model = ModelConfig {
        name: b.model_name.ok_or(ConfigError::MissingRequired { key: "model.name" })?,
        theta: b.theta.ok_or(ConfigError::MissingRequired { key: "model.theta" })?,
        tau: b.tau,
        sigma: b.sigma,
    };
    let cfg = RunConfig {
        subcommand: b.subcommand,
        seed: b.seed,
        threads: b.threads,
        out_dir: b.out_dir,
        model,
        study: b.study,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let s = &cfg.study;
    if s.j < 2 {
        return Err(ConfigError::Invalid {
            key: "study.j",
            reason: format!("J must be >= 2 (a cubic needs at least 4 grid values), got {}", s.j),
        });
    }
    if !(s.m_exponent > 0.5 && s.m_exponent < 1.0) && !s.m_exponent.is_infinite() {
        return Err(ConfigError::Invalid {
            key: "study.m_exponent",
            reason: format!("must lie in the open interval (0.5, 1), got {}", s.m_exponent),
        });
    }
    if s.delta_exponent != 0.25 && s.delta_exponent != 0.5 {
        return Err(ConfigError::Invalid {
            key: "study.delta_exponent",
            reason: format!("must be 0.25 or 0.5, got {}", s.delta_exponent),
        });
    }
    if s.n_ladder.is_empty() {
        return Err(ConfigError::Invalid { key: "study.n_ladder", reason: "must not be empty".into() });
    }
    Ok(())
}

/// Render the fully resolved configuration, defaults and seed included, in
/// the same format `parse_config` accepts.
pub fn manifest(cfg: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str("# resolved run configuration; reusable via --config\n");
    if let Some(sub) = cfg.subcommand {
        out.push_str(&format!("subcommand = {}\n", sub.name()));
    }
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("threads = {}\n", cfg.threads));
    out.push_str("\n[model]\n");
    out.push_str(&format!("name = {}\n", cfg.model.name));
    out.push_str(&format!("theta = {}\n", cfg.model.theta));
    out.push_str(&format!("tau = {}\n", cfg.model.tau));
    out.push_str(&format!("sigma = {}\n", cfg.model.sigma));
    out.push_str("\n[study]\n");
    let ladder: Vec<String> = cfg.study.n_ladder.iter().map(|n| n.to_string()).collect();
    out.push_str(&format!("n_ladder = {}\n", ladder.join(",")));
    out.push_str(&format!("m_exponent = {}\n", float_key(cfg.study.m_exponent)));
    out.push_str(&format!("j = {}\n", cfg.study.j));
    out.push_str(&format!("replicates = {}\n", cfg.study.replicates));
    out.push_str(&format!("delta_exponent = {}\n", cfg.study.delta_exponent));
    out.push_str(&format!("t = {}\n", cfg.study.t));
    out.push_str(&format!("remainder_replicates = {}\n", cfg.study.remainder_replicates));
    out.push_str(&format!("m_rule = {}\n", float_key(cfg.study.m_rule)));
    out.push_str(&format!("share_draws = {}\n", cfg.study.share_draws));
    out.push_str("\n[output]\n");
    out.push_str(&format!("dir = {}\n", cfg.out_dir));
    out
}

fn float_key(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}
