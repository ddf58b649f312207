//! Scenario files: one `key = value` per line, grouped under `[section]`
//! headers, `#` comments, comma-separated lists.
//!
//! ```text
//! [scenario]
//! horizon = 1000
//! trials = 20
//! master_seed = 7
//!
//! [graph]
//! agents = 10
//! edges = 20
//!
//! [costs]
//! model = logistic
//! dim = 16
//! samples = 20
//! reg = 5
//!
//! [algorithm]
//! alpha = 0.5
//! rho = 0.1
//! theta = 1e-8
//! ```

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cost::{CostFamily, ProxConfig};
use crate::engine::AlgorithmParams;
use crate::error::{Error, Result};
use crate::experiment::{ChannelSpec, CostSpec, GraphSpec, MetricsSpec, Scenario};

const KEYS: &[(&str, &[&str])] = &[
    ("scenario", &["name", "horizon", "trials", "master_seed"]),
    ("graph", &["agents", "edges", "edge_list", "seed"]),
    (
        "costs",
        &[
            "model",
            "dim",
            "samples",
            "reg",
            "label_noise",
            "switches",
            "drift",
            "dataset",
        ],
    ),
    ("algorithm", &["alpha", "rho", "theta", "max_inner"]),
    (
        "channel",
        &[
            "p_fast",
            "p_slow",
            "slow_nodes",
            "link_success",
            "link_noise",
            "compute_noise",
            "quant_delta",
            "quant_max",
            "lossy_self_loops",
        ],
    ),
    (
        "metrics",
        &["residual", "theory_bound", "gamma", "gamma_samples", "gamma_radius"],
    ),
];

struct Entries {
    values: BTreeMap<(&'static str, &'static str), (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section: Option<(&'static str, &'static [&'static str])> = None;
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(Some(line), format!("malformed section header `{content}`")))?
                    .trim();
                section = Some(
                    KEYS.iter()
                        .find(|(s, _)| *s == name)
                        .copied()
                        .ok_or_else(|| Error::config(Some(line), format!("unknown section `[{name}]`")))?,
                );
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(Some(line), format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let (sec, keys) =
                section.ok_or_else(|| Error::config(Some(line), format!("key `{key}` appears before any section")))?;
            let key = keys
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| Error::config(Some(line), format!("unknown key `{key}` in [{sec}]")))?;
            if value.is_empty() {
                return Err(Error::config(Some(line), format!("empty value for `{key}`")));
            }
            if values.insert((sec, *key), (line, value.to_string())).is_some() {
                return Err(Error::config(Some(line), format!("duplicate key `{key}` in [{sec}]")));
            }
        }
        Ok(Entries { values })
    }

    fn raw(&self, section: &'static str, key: &'static str) -> Option<&(usize, String)> {
        self.values.get(&(section, key))
    }

    fn get<T: FromStr>(&self, section: &'static str, key: &'static str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(section, key)
            .map(|(line, value)| {
                value
                    .parse()
                    .map_err(|e| Error::config(Some(*line), format!("invalid value `{value}` for `{key}`: {e}")))
            })
            .transpose()
    }

    fn or<T: FromStr>(&self, section: &'static str, key: &'static str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, section: &'static str, key: &'static str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(section, key)?
            .ok_or_else(|| Error::config(None, format!("missing required key `{key}` in [{section}]")))
    }
}

fn parse_edge_list(line: usize, value: &str) -> Result<Vec<(usize, usize)>> {
    value
        .split(',')
        .map(|pair| {
            let pair = pair.trim();
            let parsed = pair
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            parsed.ok_or_else(|| {
                Error::config(
                    Some(line),
                    format!("invalid entry `{pair}` in `edge_list` (expected i-j)"),
                )
            })
        })
        .collect()
}

/// Parses a comma-separated list of numbers, rejecting empty lists.
pub fn parse_value_list(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::config(None, "the value list is empty"));
    }
    let values: Vec<&str> = text.split(',').map(str::trim).collect();
    if values.iter().any(|v| v.is_empty()) {
        return Err(Error::config(None, format!("empty entry in value list `{text}`")));
    }
    values
        .iter()
        .map(|v| {
            v.parse()
                .map_err(|e| Error::config(None, format!("invalid list value `{v}`: {e}")))
        })
        .collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let e = Entries::parse(text)?;

    let agents = e.require("graph", "agents")?;
    let graph = match (e.raw("graph", "edges"), e.raw("graph", "edge_list")) {
        (Some(_), Some((line, _))) => {
            return Err(Error::config(
                Some(*line),
                "`edges` and `edge_list` are mutually exclusive",
            ));
        }
        (Some(_), None) => GraphSpec::Random {
            agents,
            edges: e.require("graph", "edges")?,
            seed: e.get("graph", "seed")?,
        },
        (None, Some((line, list))) => {
            if let Some((line, _)) = e.raw("graph", "seed") {
                return Err(Error::config(Some(*line), "`seed` only applies to random graphs"));
            }
            GraphSpec::Explicit {
                agents,
                edges: parse_edge_list(*line, list)?,
            }
        }
        (None, None) => {
            return Err(Error::config(
                None,
                "missing required key `edges` or `edge_list` in [graph]",
            ));
        }
    };

    let dataset: Option<PathBuf> = e.get("costs", "dataset")?;
    let (dim, samples) = if dataset.is_some() {
        (e.or("costs", "dim", 0)?, e.or("costs", "samples", 0)?)
    } else {
        (e.require("costs", "dim")?, e.require("costs", "samples")?)
    };
    let costs = CostSpec {
        family: e.require::<CostFamily>("costs", "model")?,
        dim,
        samples,
        reg_weight: e.or("costs", "reg", 0.0)?,
        label_noise: e.or("costs", "label_noise", 1.0)?,
        switches: e.or("costs", "switches", 0)?,
        drift_target: e.or("costs", "drift", 2.5)?,
        dataset,
    };

    let algorithm = AlgorithmParams {
        alpha: e.require("algorithm", "alpha")?,
        rho: e.require("algorithm", "rho")?,
        prox: ProxConfig {
            threshold: e.require("algorithm", "theta")?,
            max_inner_iterations: e.or("algorithm", "max_inner", ProxConfig::DEFAULT_MAX_INNER)?,
        },
    };

    let d = ChannelSpec::default();
    let channel = ChannelSpec {
        p_fast: e.or("channel", "p_fast", d.p_fast)?,
        p_slow: e.or("channel", "p_slow", d.p_slow)?,
        slow_nodes: e.or("channel", "slow_nodes", d.slow_nodes)?,
        link_success: e.or("channel", "link_success", d.link_success)?,
        link_noise: e.or("channel", "link_noise", d.link_noise)?,
        compute_noise: e.or("channel", "compute_noise", d.compute_noise)?,
        quant_delta: e.or("channel", "quant_delta", d.quant_delta)?,
        quant_max: e.or("channel", "quant_max", d.quant_max)?,
        lossy_self_loops: e.or("channel", "lossy_self_loops", d.lossy_self_loops)?,
    };

    let d = MetricsSpec::default();
    let metrics = MetricsSpec {
        residual: e.or("metrics", "residual", d.residual)?,
        theory_bound: e.or("metrics", "theory_bound", d.theory_bound)?,
        gamma: e.get("metrics", "gamma")?,
        gamma_samples: e.or("metrics", "gamma_samples", d.gamma_samples)?,
        gamma_radius: e.or("metrics", "gamma_radius", d.gamma_radius)?,
    };

    let scenario = Scenario {
        name: e.or("scenario", "name", "scenario".to_string())?,
        graph,
        costs,
        algorithm,
        channel,
        metrics,
        horizon: e.require("scenario", "horizon")?,
        trials: e.require("scenario", "trials")?,
        master_seed: e.require("scenario", "master_seed")?,
    };
    check_ranges(&scenario)?;
    scenario
        .validate()
        .map_err(|err| Error::config(None, err.to_string()))?;
    Ok(scenario)
}

fn check_ranges(s: &Scenario) -> Result<()> {
    let c = &s.channel;
    let checks: [(&str, bool); 9] = [
        ("p_fast", c.p_fast > 0.0 && c.p_fast <= 1.0),
        ("p_slow", c.p_slow > 0.0 && c.p_slow <= 1.0),
        ("link_success", c.link_success > 0.0 && c.link_success <= 1.0),
        ("link_noise", c.link_noise >= 0.0 && c.link_noise.is_finite()),
        ("compute_noise", c.compute_noise >= 0.0 && c.compute_noise.is_finite()),
        ("quant_delta", c.quant_delta >= 0.0 && c.quant_delta.is_finite()),
        ("quant_max", c.quant_max > 0.0 && c.quant_max.is_finite()),
        ("gamma", s.metrics.gamma.is_none_or(|g| g > 0.0 && g.is_finite())),
        ("gamma_radius", s.metrics.gamma_radius > 0.0),
    ];
    for (key, ok) in checks {
        if !ok {
            return Err(Error::config(None, format!("value of `{key}` is out of range")));
        }
    }
    if let GraphSpec::Random { agents, edges, .. } = s.graph {
        if edges + 1 < agents || edges > agents * agents.saturating_sub(1) / 2 {
            return Err(Error::config(
                None,
                format!("`edges` = {edges} cannot form a connected simple graph on {agents} agents"),
            ));
        }
    }
    if s.channel.slow_nodes > s.graph.agents() {
        return Err(Error::config(None, "`slow_nodes` exceeds the number of agents"));
    }
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(None, format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Writes a scenario in the format read by [`parse_scenario`].
pub fn render_scenario(s: &Scenario) -> String {
    let mut w = Writer(String::new());
    w.section("scenario");
    w.kv("name", &s.name);
    w.kv("horizon", s.horizon);
    w.kv("trials", s.trials);
    w.kv("master_seed", s.master_seed);
    w.section("graph");
    match &s.graph {
        GraphSpec::Random { agents, edges, seed } => {
            w.kv("agents", agents);
            w.kv("edges", edges);
            if let Some(seed) = seed {
                w.kv("seed", seed);
            }
        }
        GraphSpec::Explicit { agents, edges } => {
            w.kv("agents", agents);
            let list: Vec<String> = edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            w.kv("edge_list", list.join(", "));
        }
    }
    let c = &s.costs;
    w.section("costs");
    w.kv("model", c.family);
    w.kv("dim", c.dim);
    w.kv("samples", c.samples);
    w.kv("reg", c.reg_weight);
    w.kv("label_noise", c.label_noise);
    w.kv("switches", c.switches);
    w.kv("drift", c.drift_target);
    if let Some(path) = &c.dataset {
        w.kv("dataset", path.display());
    }
    let a = &s.algorithm;
    w.section("algorithm");
    w.kv("alpha", a.alpha);
    w.kv("rho", a.rho);
    w.kv("theta", a.prox.threshold);
    w.kv("max_inner", a.prox.max_inner_iterations);
    let ch = &s.channel;
    w.section("channel");
    w.kv("p_fast", ch.p_fast);
    w.kv("p_slow", ch.p_slow);
    w.kv("slow_nodes", ch.slow_nodes);
    w.kv("link_success", ch.link_success);
    w.kv("link_noise", ch.link_noise);
    w.kv("compute_noise", ch.compute_noise);
    w.kv("quant_delta", ch.quant_delta);
    w.kv("quant_max", ch.quant_max);
    w.kv("lossy_self_loops", ch.lossy_self_loops);
    let m = &s.metrics;
    w.section("metrics");
    w.kv("residual", m.residual);
    w.kv("theory_bound", m.theory_bound);
    if let Some(g) = m.gamma {
        w.kv("gamma", g);
    }
    w.kv("gamma_samples", m.gamma_samples);
    w.kv("gamma_radius", m.gamma_radius);
    w.0
}

struct Writer(String);

impl Writer {
    fn section(&mut self, name: &str) {
        if !self.0.is_empty() {
            self.0.push('\n');
        }
        writeln!(self.0, "[{name}]").expect("writing to a string");
    }

    fn kv(&mut self, key: &str, value: impl Display) {
        writeln!(self.0, "{key} = {value}").expect("writing to a string");
    }
}
