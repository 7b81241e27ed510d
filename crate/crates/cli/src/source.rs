//! Where a chain comes from: a JSON model file or a bundled preset.

use std::collections::BTreeMap;
use std::path::Path;

use chainproof::crowds::{build_crowds, Crowds, CrowdsParams};
use chainproof::model::ModelFile;
use chainproof::zeroconf::{build_zeroconf, Zeroconf, ZeroconfParams};
use chainproof::{MarkovChain, RewardChain, Scalar, StateSet};

use crate::error::{CliError, CliResult, ExitKind};

/// Ordered `key=value` settings, as given on the command line or in a sweep.
pub type Settings = Vec<(String, String)>;

pub enum Source<S> {
    File { rchain: RewardChain<S>, has_rewards: bool },
    Zeroconf(Zeroconf<S>),
    Crowds(Crowds<S>),
}

impl<S: Scalar> Source<S> {
    pub fn resolve(spec: &str) -> CliResult<Self> {
        if let Some(rest) = spec.strip_prefix("zeroconf:") {
            let params = zeroconf_params::<S>(&preset_settings(rest, "paper-typical")?)?;
            return Ok(Source::Zeroconf(build_zeroconf(&params)?));
        }
        if let Some(rest) = spec.strip_prefix("crowds:") {
            let params = crowds_params::<S>(&preset_settings(rest, "fig3")?, None)?;
            return Ok(Source::Crowds(build_crowds(&params)?));
        }
        let model = read_model(Path::new(spec))?;
        let rchain = model.to_reward_chain().map_err(CliError::from_model)?;
        Ok(Source::File { rchain, has_rewards: model.has_rewards() })
    }

    pub fn chain(&self) -> &MarkovChain<S> {
        match self {
            Source::File { rchain, .. } => rchain.chain(),
            Source::Zeroconf(z) => z.chain(),
            Source::Crowds(c) => c.chain(),
        }
    }

    /// The cost structure, if the source carries one.
    pub fn rewards(&self) -> Option<&RewardChain<S>> {
        match self {
            Source::File { rchain, has_rewards: true } => Some(rchain),
            Source::Zeroconf(z) => Some(z.reward_chain()),
            _ => None,
        }
    }
}

/// `name` selects the preset's defaults; otherwise the text is a
/// comma-separated list of overrides.
fn preset_settings(text: &str, name: &str) -> CliResult<Settings> {
    if text == name || text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::usage(format!("preset setting `{kv}` is not key=value (or use `{name}`)")))
        })
        .collect()
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(ExitKind::Io, format!("cannot read {}: {e}", path.display())))
}

pub fn read_model(path: &Path) -> CliResult<ModelFile> {
    ModelFile::from_json(&read_text(path)?).map_err(CliError::from_model)
}

pub fn number<S: Scalar>(flag: &str, text: &str) -> CliResult<S> {
    S::parse(text).map_err(|_| CliError::usage(format!("--{flag}: `{text}` is not a number literal")))
}

fn count(flag: &str, text: &str) -> CliResult<usize> {
    text.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("--{flag}: `{text}` is not a non-negative integer")))
}

/// ZeroConf parameters: the paper-typical values overridden by `settings`
/// (keys `probes`, `p`, `q`, `hosts`, `r`, `E`).
pub fn zeroconf_params<S: Scalar>(settings: &[(String, String)]) -> CliResult<ZeroconfParams<S>> {
    let mut params = ZeroconfParams::<S>::paper_typical();
    let mut q_from: Option<&str> = None;
    for (key, value) in settings {
        match key.as_str() {
            "probes" | "N" => params.last_probe = count(key, value)?,
            "p" => params.p = number(key, value)?,
            "r" => params.r = number(key, value)?,
            "E" | "e" => params.e = number(key, value)?,
            "q" | "hosts" => {
                if let Some(prev) = q_from.filter(|prev| *prev != key) {
                    return Err(CliError::usage(format!("--{key} conflicts with --{prev}")));
                }
                q_from = Some(key);
                params.q = if key == "q" {
                    number(key, value)?
                } else {
                    ZeroconfParams::<S>::q_for_hosts(count(key, value)?)
                };
            }
            other => return Err(CliError::usage(format!("unknown zeroconf setting `{other}`"))),
        }
    }
    params.validate()?;
    Ok(params)
}

/// Crowds parameters from `jondos`, `colls` and `pf` (defaults 3, 1, 1/2),
/// with an optional initiator law read from a JSON object file.
pub fn crowds_params<S: Scalar>(settings: &[(String, String)], init: Option<&Path>) -> CliResult<CrowdsParams<S>> {
    let (mut jondos, mut colls, mut p_f) = (3usize, 1usize, S::from_ratio(1, 2));
    for (key, value) in settings {
        match key.as_str() {
            "jondos" | "J" => jondos = count(key, value)?,
            "colls" | "C" => colls = count(key, value)?,
            "pf" | "p_f" => p_f = number(key, value)?,
            other => return Err(CliError::usage(format!("unknown crowds setting `{other}`"))),
        }
    }
    let mut params = CrowdsParams::uniform(jondos, colls, p_f)?;
    if let Some(path) = init {
        params.init = read_init::<S>(path)?;
        params.validate()?;
    }
    Ok(params)
}

fn read_init<S: Scalar>(path: &Path) -> CliResult<BTreeMap<String, S>> {
    let text = read_text(path)?;
    let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::new(ExitKind::Parse, format!("{}: {e}", path.display())))?;
    raw.into_iter()
        .map(|(k, v)| {
            let literal = match &v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                _ => return Err(CliError::new(ExitKind::Parse, format!("init value for `{k}` is not a number"))),
            };
            let value = S::parse(&literal)
                .map_err(|_| CliError::new(ExitKind::Parse, format!("init value `{literal}` for `{k}`")))?;
            Ok((k, value))
        })
        .collect()
}

/// Comma-separated labels, or `ALL` for the whole state space.
pub fn label_set<S: Scalar>(chain: &MarkovChain<S>, text: &str) -> CliResult<StateSet> {
    let text = text.trim();
    if text == "ALL" {
        return Ok(chain.all_states());
    }
    if text.is_empty() {
        return Ok(StateSet::new());
    }
    Ok(chain.state_set(text.split(',').map(str::trim))?)
}

/// Splits `PHI=>PSI`.
pub fn until_spec(text: &str) -> CliResult<(&str, &str)> {
    text.split_once("=>")
        .ok_or_else(|| CliError::usage(format!("`{text}` is not of the form PHI=>PSI")))
}

/// Parses a sweep spec `key=v1,v2;key2=w1,w2` into its grid points, the
/// first key varying slowest.
pub fn sweep_grid(spec: &str) -> CliResult<Vec<Settings>> {
    let mut grid: Vec<Settings> = vec![Vec::new()];
    for axis in spec.split(';').map(str::trim).filter(|a| !a.is_empty()) {
        let (key, values) = axis
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("sweep axis `{axis}` is not key=v1,v2,...")))?;
        let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(CliError::usage(format!("sweep axis `{key}` has no values")));
        }
        grid = grid
            .into_iter()
            .flat_map(|point| {
                values.iter().map(move |v| {
                    let mut p = point.clone();
                    p.push((key.trim().to_string(), v.to_string()));
                    p
                })
            })
            .collect();
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid_is_cartesian_first_key_slowest() {
        let grid = sweep_grid("p=1/100,1/10;probes=1,2,3").unwrap();
        assert_eq!(grid.len(), 6);
        assert_eq!(grid[0], vec![("p".into(), "1/100".into()), ("probes".into(), "1".into())]);
        assert_eq!(grid[3][0].1, "1/10");
        assert!(sweep_grid("p").is_err());
    }

    #[test]
    fn hosts_sets_q() {
        let params = zeroconf_params::<chainproof::Rational>(&[("hosts".into(), "16".into())]).unwrap();
        assert_eq!(params.q, chainproof::Rational::new(1.into(), 4064.into()));
        let clash = zeroconf_params::<f64>(&[("hosts".into(), "16".into()), ("q".into(), "1/2".into())]);
        assert_eq!(clash.err().unwrap().kind, ExitKind::Usage);
    }
}
