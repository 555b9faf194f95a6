//! Flat `section.key = value` experiment configuration.
//!
//! Lists are comma-separated and define sweep grids. `#` starts a comment.
//! A key may be written without its section when the bare name is unique.

use std::fmt;

use mhtc_core::analytics::RetransPolicy;
use mhtc_core::channel::{ChannelModel, FadingSpec, HopModel};
use mhtc_core::{AttemptVector, NetworkConfig, SimMode};

use crate::CliError;

/// Every recognised key with its default, in serialization order.
const KEYS: &[(&str, &str)] = &[
    ("network.lambda", "0.1"),
    ("network.gamma", "0.1"),
    ("network.r", "4"),
    ("network.m", "1"),
    ("network.d_max", "3600"),
    ("channel.model", "rayleigh"),
    ("channel.alpha", "3"),
    ("channel.beta", "1"),
    ("channel.m0", "1"),
    ("channel.g", "none"),
    ("channel.k", "none"),
    ("policy.kind", "single"),
    ("policy.attempts", ""),
    ("policy.budget", "none"),
    ("analysis.epsilon", "0.05"),
    ("simulation.window", "auto"),
    ("simulation.trials", "1000"),
    ("simulation.mode", "dynamic"),
    ("simulation.seed", "1"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Single,
    BestEffort,
    TotalBudget,
}

impl PolicyKind {
    fn tag(self) -> &'static str {
        match self {
            PolicyKind::Single => "single",
            PolicyKind::BestEffort => "best_effort",
            PolicyKind::TotalBudget => "total_budget",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "single" | "single_attempt" => Some(PolicyKind::Single),
            "best_effort" => Some(PolicyKind::BestEffort),
            "total_budget" => Some(PolicyKind::TotalBudget),
            _ => None,
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub lambda: Vec<f64>,
    pub gamma: f64,
    pub r: f64,
    pub m: Vec<usize>,
    /// `None` entries are unbounded.
    pub d_max: Vec<Option<f64>>,
    pub channel: ChannelModel,
    pub alpha: f64,
    pub beta: f64,
    pub m0: u32,
    pub g: Option<f64>,
    pub k: Option<f64>,
    pub policy: PolicyKind,
    pub attempts: Vec<u32>,
    pub budget: Option<u32>,
    pub epsilon: f64,
    /// `None` picks the smallest window the simulator accepts.
    pub window: Option<f64>,
    pub trials: u64,
    pub mode: SimMode,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config::parse_str("", "<default>").expect("defaults parse")
    }
}

/// Where a raw value came from, for diagnostics.
#[derive(Debug, Clone)]
enum Origin {
    Default,
    Line(String, usize),
    Override(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::Line(file, n) => write!(f, "{file}:{n}"),
            Origin::Override(s) => write!(f, "override `{s}`"),
        }
    }
}

/// Raw key/value table before typing.
#[derive(Debug, Clone)]
pub struct RawConfig {
    values: Vec<(String, Origin)>,
}

fn resolve_key(key: &str) -> Option<usize> {
    if let Some(i) = KEYS.iter().position(|(k, _)| *k == key) {
        return Some(i);
    }
    let mut hits = KEYS.iter().enumerate().filter(|(_, (k, _))| k.rsplit('.').next() == Some(key));
    match (hits.next(), hits.next()) {
        (Some((i, _)), None) => Some(i),
        _ => None,
    }
}

impl RawConfig {
    fn defaults() -> Self {
        RawConfig { values: KEYS.iter().map(|(_, v)| (v.to_string(), Origin::Default)).collect() }
    }

    fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        let i = resolve_key(key).ok_or_else(|| CliError::Config(format!("{origin}: unknown key `{key}`")))?;
        self.values[i] = (value.to_string(), origin);
        Ok(())
    }

    fn read(&mut self, text: &str, name: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let origin = Origin::Line(name.to_string(), n + 1);
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}: expected `key = value`, got `{line}`")))?;
            self.set(key.trim(), value.trim(), origin)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
        self.set(key.trim(), value.trim(), Origin::Override(spec.to_string()))
    }

    pub fn resolve(&self) -> Result<Config, CliError> {
        let f = Fields { raw: self };
        Ok(Config {
            lambda: f.list("network.lambda", parse_f64)?,
            gamma: f.one("network.gamma", parse_f64)?,
            r: f.one("network.r", parse_f64)?,
            m: f.list("network.m", |s| s.parse::<usize>().map_err(|e| e.to_string()))?,
            d_max: f.list("network.d_max", parse_budget)?,
            channel: f.one("channel.model", |s| ChannelModel::from_tag(s).ok_or_else(|| "unknown channel model".into()))?,
            alpha: f.one("channel.alpha", parse_f64)?,
            beta: f.one("channel.beta", parse_f64)?,
            m0: f.one("channel.m0", |s| s.parse::<u32>().map_err(|e| e.to_string()))?,
            g: f.one("channel.g", |s| parse_opt(s, parse_f64))?,
            k: f.one("channel.k", |s| parse_opt(s, parse_f64))?,
            policy: f.one("policy.kind", |s| PolicyKind::from_tag(s).ok_or_else(|| "unknown policy".into()))?,
            attempts: f.list("policy.attempts", |s| s.parse::<u32>().map_err(|e| e.to_string()))?,
            budget: f.one("policy.budget", |s| parse_opt(s, |s| s.parse::<u32>().map_err(|e| e.to_string())))?,
            epsilon: f.one("analysis.epsilon", parse_f64)?,
            window: f.one("simulation.window", |s| {
                if s == "auto" { Ok(None) } else { parse_f64(s).map(Some) }
            })?,
            trials: f.one("simulation.trials", |s| s.parse::<u64>().map_err(|e| e.to_string()))?,
            mode: f.one("simulation.mode", |s| SimMode::from_tag(s).ok_or_else(|| "unknown simulation mode".into()))?,
            seed: f.one("simulation.seed", |s| s.parse::<u64>().map_err(|e| e.to_string()))?,
        })
    }
}

struct Fields<'a> {
    raw: &'a RawConfig,
}

impl Fields<'_> {
    fn get(&self, key: &str) -> &(String, Origin) {
        &self.raw.values[resolve_key(key).expect("known key")]
    }

    fn err(&self, key: &str, msg: &str) -> CliError {
        let (value, origin) = self.get(key);
        CliError::Config(format!("{origin}: field `{key}`: {msg} (value `{value}`)"))
    }

    fn one<T>(&self, key: &str, p: impl Fn(&str) -> Result<T, String>) -> Result<T, CliError> {
        p(&self.get(key).0).map_err(|m| self.err(key, &m))
    }

    fn list<T>(&self, key: &str, p: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, CliError> {
        let v = &self.get(key).0;
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',').map(|s| p(s.trim()).map_err(|m| self.err(key, &m))).collect()
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| "not a number".to_string())?;
    if v.is_nan() {
        return Err("not a number".into());
    }
    Ok(v)
}

fn parse_budget(s: &str) -> Result<Option<f64>, String> {
    match s {
        "inf" | "none" | "unbounded" => Ok(None),
        _ => parse_f64(s).map(|v| if v.is_infinite() { None } else { Some(v) }),
    }
}

fn parse_opt<T>(s: &str, p: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if s == "none" { Ok(None) } else { p(s).map(Some) }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("none".to_string(), |v| v.to_string())
}

impl Config {
    pub fn parse_str(text: &str, name: &str) -> Result<Config, CliError> {
        Self::parse_with(text, name, &[])
    }

    /// Parses a file's text and then applies `key=value` overrides.
    pub fn parse_with(text: &str, name: &str, overrides: &[String]) -> Result<Config, CliError> {
        let mut raw = RawConfig::defaults();
        raw.read(text, name)?;
        for o in overrides {
            raw.apply_override(o)?;
        }
        raw.resolve()
    }

    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_with(&text, &path.display().to_string(), overrides)
    }

    /// Canonical text form; parses back to an equal `Config`.
    pub fn serialize(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let vals = [
            join(&self.lambda, |v| v.to_string()),
            self.gamma.to_string(),
            self.r.to_string(),
            join(&self.m, |v| v.to_string()),
            join(&self.d_max, |v| v.map_or("inf".to_string(), |d| d.to_string())),
            self.channel.tag().to_string(),
            self.alpha.to_string(),
            self.beta.to_string(),
            self.m0.to_string(),
            opt(&self.g),
            opt(&self.k),
            self.policy.tag().to_string(),
            join(&self.attempts, |v| v.to_string()),
            opt(&self.budget),
            self.epsilon.to_string(),
            self.window.map_or("auto".to_string(), |w| w.to_string()),
            self.trials.to_string(),
            self.mode.tag().to_string(),
            self.seed.to_string(),
        ];
        KEYS.iter().map(|(k, _)| *k).zip(vals).collect()
    }

    pub fn hop_model(&self) -> Result<HopModel, CliError> {
        let hop = match self.channel {
            ChannelModel::Custom => match (self.g, self.k) {
                (Some(g), Some(k)) => HopModel::custom(g, k),
                _ => return Err(CliError::Config("channel.model = custom needs channel.g and channel.k".into())),
            },
            ChannelModel::NakagamiLow | ChannelModel::NakagamiHigh => {
                HopModel::from_spec(self.channel, FadingSpec::nakagami(self.alpha, self.beta, self.m0))
            }
            model => HopModel::from_spec(model, FadingSpec::new(self.alpha, self.beta)),
        };
        hop.map_err(|e| CliError::Config(format!("channel: {e}")))
    }

    fn policy_for(&self, m: usize) -> Result<RetransPolicy, CliError> {
        Ok(match self.policy {
            PolicyKind::Single => RetransPolicy::SingleAttempt,
            PolicyKind::BestEffort => {
                let k = if self.attempts.is_empty() { vec![1; m + 1] } else { self.attempts.clone() };
                RetransPolicy::BestEffort(AttemptVector::new(k).map_err(|e| CliError::Config(format!("policy.attempts: {e}")))?)
            }
            PolicyKind::TotalBudget => RetransPolicy::TotalBudget(
                self.budget.ok_or_else(|| CliError::Config("policy.kind = total_budget needs policy.budget".into()))?,
            ),
        })
    }

    /// One validated network configuration per grid point, in
    /// (d_max, m, lambda) order with lambda varying fastest.
    pub fn grid(&self) -> Result<Vec<NetworkConfig>, CliError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Config(format!("field `analysis.epsilon`: must lie in (0,1), got {}", self.epsilon)));
        }
        let hop = self.hop_model()?;
        let mut out = Vec::new();
        for &d in &self.d_max {
            for &m in &self.m {
                let policy = self.policy_for(m)?;
                for &lambda in &self.lambda {
                    let cfg = NetworkConfig::new(lambda, self.gamma, self.r, m, d, hop).with_policy(policy.clone());
                    cfg.validate().map_err(|e| {
                        CliError::Config(format!("grid point lambda={lambda}, m={m}, d_max={}: {e}", fmt_budget(d)))
                    })?;
                    out.push(cfg);
                }
            }
        }
        Ok(out)
    }
}

pub fn fmt_budget(d: Option<f64>) -> String {
    d.map_or("inf".to_string(), |d| d.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        assert_eq!(Config::parse_str(&c.serialize(), "x").unwrap(), c);
    }

    #[test]
    fn bare_keys_and_comments() {
        let c = Config::parse_str("lambda = 0.1, 0.2 # grid\n\n# note\nd_max = inf\nseed=9", "f").unwrap();
        assert_eq!(c.lambda, vec![0.1, 0.2]);
        assert_eq!(c.d_max, vec![None]);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = Config::parse_str("network.gamma = 0.5\nnetwork.r = four\n", "cfg.txt").unwrap_err().to_string();
        assert!(e.contains("cfg.txt:2") && e.contains("network.r"), "{e}");
        let e = Config::parse_str("\nbogus = 1\n", "cfg.txt").unwrap_err().to_string();
        assert!(e.contains("cfg.txt:2") && e.contains("bogus"), "{e}");
        let e = Config::parse_str("lambda 3\n", "cfg.txt").unwrap_err().to_string();
        assert!(e.contains("cfg.txt:1"), "{e}");
    }

    #[test]
    fn override_wins_and_lambda_zero_is_rejected() {
        let c = Config::parse_with("lambda = 0.3", "f", &["lambda=0.2".into()]).unwrap();
        assert_eq!(c.lambda, vec![0.2]);
        let c = Config::parse_with("", "f", &["lambda=0".into()]).unwrap();
        assert!(matches!(c.grid(), Err(CliError::Config(_))));
    }

    #[test]
    fn ambiguous_suffix_is_unknown() {
        // `m0` and `m` are distinct; nothing ends in `.model2`.
        assert!(resolve_key("m").is_some());
        assert!(resolve_key("model2").is_none());
    }

    #[test]
    fn custom_channel_needs_both_coefficients() {
        let c = Config::parse_str("channel.model = custom\nchannel.g = 1", "f").unwrap();
        assert!(c.hop_model().is_err());
    }
}
