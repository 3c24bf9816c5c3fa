use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::{CliError, Result};
use crate::trainers::ToyConfig;
use crate::transfer::{Preset, TransferConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainerKind {
    Cost,
    ToyMdp,
}

impl fmt::Display for TrainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainerKind::Cost => "cost",
            TrainerKind::ToyMdp => "toymdp",
        })
    }
}

impl FromStr for TrainerKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cost" => Ok(TrainerKind::Cost),
            "toymdp" => Ok(TrainerKind::ToyMdp),
            _ => Err(CliError::Input(format!("unknown trainer `{s}`; expected cost or toymdp"))),
        }
    }
}

/// Flat `key = value` settings. Blank lines and `#` comments are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlatConfig {
    pub entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("{origin}:{}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(CliError::Input(format!("{origin}:{}: empty key", n + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Input(format!("{origin}:{}: duplicate key `{k}`", n + 1)));
            }
        }
        Ok(FlatConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `other` wins on shared keys.
    pub fn merge(&mut self, other: FlatConfig) {
        self.entries.extend(other.entries);
    }
}

/// Everything a command needs besides its input files.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub preset: Preset,
    pub trainer: TrainerKind,
    pub transfer: TransferConfig,
    pub toy: ToyConfig,
    /// PD gains and exploration of the toy source expert.
    pub expert: [f64; 3],
}

impl RunSettings {
    /// Preset first, then every entry of `cfg` in key order.
    pub fn resolve(cfg: &FlatConfig) -> Result<Self> {
        let preset = match cfg.entries.get("run.preset") {
            Some(v) => v.parse().map_err(|e| bad_value("run.preset", v, e))?,
            None => Preset::TableDefaults,
        };
        let mut s = RunSettings {
            preset,
            trainer: TrainerKind::Cost,
            transfer: preset.config(),
            toy: ToyConfig::default(),
            expert: [2.0, 1.0, -2.0],
        };
        for (k, v) in &cfg.entries {
            s.set(k, v)?;
        }
        s.transfer.validate().map_err(|e| CliError::Input(e.to_string()))?;
        if s.toy.batch_size == 0 || s.toy.horizon == 0 || s.toy.probe_rollouts == 0 {
            return Err(CliError::Input("toy batch_size, horizon and probe_rollouts must be positive".into()));
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let t = &mut self.transfer;
        let toy = &mut self.toy;
        match key {
            "run.preset" => {}
            "run.trainer" => self.trainer = v.parse()?,
            "run.norm" | "transfer.p_norm" => t.p_norm = parse(key, v)?,
            "transfer.penalty_norm" => t.penalty_norm = parse(key, v)?,
            "transfer.xi" => t.xi = parse(key, v)?,
            "transfer.lambda" => t.lambda = parse(key, v)?,
            "transfer.success_threshold" => t.success_threshold = parse(key, v)?,
            "transfer.final_success" => t.final_success = parse(key, v)?,
            "transfer.shrink_ratio" => t.shrink_ratio = parse(key, v)?,
            "transfer.gradient_samples" => t.gradient_samples = parse(key, v)?,
            "transfer.max_phase_iterations" => t.max_phase_iterations = parse(key, v)?,
            "transfer.max_phases" => t.max_phases = parse(key, v)?,
            "transfer.eval_episodes" => t.eval_episodes = parse(key, v)?,
            "transfer.seed" | "run.seed" => t.seed = parse(key, v)?,
            "toy.dt" => toy.dt = parse(key, v)?,
            "toy.horizon" => toy.horizon = parse(key, v)?,
            "toy.goal_radius" => toy.goal_radius = parse(key, v)?,
            "toy.start_spread" => toy.start_spread = parse(key, v)?,
            "toy.batch_size" => toy.batch_size = parse(key, v)?,
            "toy.step_size" => toy.step_size = parse(key, v)?,
            "toy.probe_rollouts" => toy.probe_rollouts = parse(key, v)?,
            "toy.expert_kp" => self.expert[0] = parse(key, v)?,
            "toy.expert_kd" => self.expert[1] = parse(key, v)?,
            "toy.expert_log_std" => self.expert[2] = parse(key, v)?,
            _ => return Err(CliError::Input(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }
}

fn bad_value(key: &str, v: &str, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("bad value `{v}` for `{key}`: {e}"))
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| bad_value(key, v, e))
}

/// Parses `key=value` command-line overrides.
pub fn parse_overrides(items: &[String]) -> Result<FlatConfig> {
    let mut out = FlatConfig::default();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("override `{item}` is not `key=value`")))?;
        out.entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;

    #[test]
    fn file_values_override_the_preset() {
        let cfg = FlatConfig::parse(
            "# comment\nrun.preset = expdesign-defaults\ntransfer.lambda = 1.1\n\nrun.trainer = toymdp\n",
            "x",
        )
        .unwrap();
        let s = RunSettings::resolve(&cfg).unwrap();
        assert_eq!(s.transfer.xi, 0.06);
        assert_eq!(s.transfer.gradient_samples, 12);
        assert_eq!(s.transfer.lambda, 1.1);
        assert_eq!(s.trainer, TrainerKind::ToyMdp);
    }

    #[test]
    fn defaults_are_the_table_preset() {
        let s = RunSettings::resolve(&FlatConfig::default()).unwrap();
        assert_eq!(s.transfer, Preset::TableDefaults.config());
        assert_eq!(s.transfer.p_norm, Norm::L1);
    }

    #[test]
    fn rejects_bad_entries() {
        for text in ["transfer.xi", "transfer.xi = abc", "transfer.nope = 1", "a = 1\na = 2", "transfer.lambda = 0.5"] {
            let r = FlatConfig::parse(text, "f").and_then(|c| RunSettings::resolve(&c));
            assert!(matches!(r, Err(CliError::Input(_))), "{text}");
        }
    }

    #[test]
    fn later_layers_win() {
        let mut a = FlatConfig::parse("transfer.xi = 0.1\ntransfer.seed = 3", "a").unwrap();
        a.merge(parse_overrides(&["transfer.xi=0.2".into()]).unwrap());
        let s = RunSettings::resolve(&a).unwrap();
        assert_eq!((s.transfer.xi, s.transfer.seed), (0.2, 3));
    }
}
