//! Flat key=value run configuration. Values come from defaults, then a config
//! file, then `FISUS_*` environment variables, then command-line flags; the
//! resolved form serializes canonically so a run can be hashed and replayed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fisus::{Folding, MitigationPlan, NoiseModel};
use sha2::{Digest, Sha256};

pub const ENV_PREFIX: &str = "FISUS_";

const KEYS: [&str; 13] = [
    "l",
    "r_start",
    "r_stop",
    "r_step",
    "estimator",
    "shots",
    "trials",
    "p1",
    "p2",
    "scale_factors",
    "folding",
    "seed",
    "out_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    Exact,
    Sampled,
    Noisy,
    Mitigated,
}

impl EstimatorChoice {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorChoice::Exact => "exact",
            EstimatorChoice::Sampled => "sampled",
            EstimatorChoice::Noisy => "noisy",
            EstimatorChoice::Mitigated => "mitigated",
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        match text {
            "exact" => Ok(EstimatorChoice::Exact),
            "sampled" => Ok(EstimatorChoice::Sampled),
            "noisy" => Ok(EstimatorChoice::Noisy),
            "mitigated" => Ok(EstimatorChoice::Mitigated),
            other => Err(format!(
                "estimator must be exact, sampled, noisy, or mitigated, got `{other}`"
            )),
        }
    }
}

pub fn folding_label(folding: Folding) -> &'static str {
    match folding {
        Folding::Unitary => "unitary",
        Folding::Cnot => "cnot",
    }
}

fn parse_folding(text: &str) -> Result<Folding, String> {
    match text {
        "unitary" => Ok(Folding::Unitary),
        "cnot" => Ok(Folding::Cnot),
        other => Err(format!("folding must be unitary or cnot, got `{other}`")),
    }
}

/// Parses `key=value` lines; `#` starts a comment. Unknown and duplicate keys
/// are rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got `{line}`", idx + 1))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(format!("line {}: unknown key `{key}`", idx + 1));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", idx + 1));
        }
    }
    Ok(out)
}

/// Collects `FISUS_*` overrides from the process environment.
pub fn env_pairs() -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (name, value) in std::env::vars() {
        let Some(suffix) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let key = suffix.to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("unknown environment override {name}"));
        }
        out.insert(key, value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub l: usize,
    pub r_start: f64,
    pub r_stop: f64,
    pub r_step: f64,
    pub estimator: EstimatorChoice,
    pub shots: u64,
    pub trials: usize,
    pub p1: f64,
    pub p2: f64,
    pub scale_factors: Vec<u64>,
    pub folding: Folding,
    pub seed: u64,
    pub out_dir: String,
}

fn field<T: std::str::FromStr>(
    merged: &BTreeMap<&str, &str>,
    key: &str,
    default: T,
) -> Result<T, String> {
    match merged.get(key) {
        None => Ok(default),
        Some(text) => text
            .parse()
            .map_err(|_| format!("bad value for {key}: `{text}`")),
    }
}

impl RunConfig {
    /// Merges the layers (later layers win) and validates every field.
    /// `study` selects the 100-trial default used by mitigation studies.
    pub fn resolve(layers: &[&BTreeMap<String, String>], study: bool) -> Result<Self, String> {
        let mut merged: BTreeMap<&str, &str> = BTreeMap::new();
        for layer in layers {
            for (key, value) in layer.iter() {
                if !KEYS.contains(&key.as_str()) {
                    return Err(format!("unknown key `{key}`"));
                }
                merged.insert(key, value);
            }
        }

        let l: usize = field(&merged, "l", 4)?;
        if l < 2 || l > 12 || l % 2 != 0 {
            return Err(format!(
                "l must be an even number of sites between 2 and 12, got {l}"
            ));
        }

        let r_start: f64 = field(&merged, "r_start", 0.5)?;
        let r_stop: f64 = field(&merged, "r_stop", 1.4)?;
        let r_step: f64 = field(&merged, "r_step", 0.1)?;
        if !r_start.is_finite() || r_start < 0.0 {
            return Err(format!("r_start must be finite and nonnegative, got {r_start}"));
        }
        if !r_stop.is_finite() || r_stop < r_start {
            return Err(format!("r_stop must be at least r_start, got {r_stop}"));
        }
        if !r_step.is_finite() || r_step <= 0.0 {
            return Err(format!("r_step must be positive, got {r_step}"));
        }

        let estimator = match merged.get("estimator") {
            None => EstimatorChoice::Sampled,
            Some(text) => EstimatorChoice::parse(text)?,
        };

        let shots: u64 = field(&merged, "shots", 8192)?;
        if shots == 0 {
            return Err("shots must be at least 1".to_string());
        }

        let trials: usize = match merged.get("trials") {
            Some(text) => text
                .parse()
                .map_err(|_| format!("bad value for trials: `{text}`"))?,
            None if study || estimator == EstimatorChoice::Mitigated => 100,
            None => 20,
        };
        if trials == 0 {
            return Err("trials must be at least 1".to_string());
        }

        let p1: f64 = field(&merged, "p1", 2e-4)?;
        let p2: f64 = field(&merged, "p2", 8e-3)?;
        NoiseModel::new(p1, p2).map_err(|e| format!("bad noise strengths: {e}"))?;

        let scale_factors = match merged.get("scale_factors") {
            None => vec![1, 3],
            Some(text) => text
                .split(';')
                .map(|part| {
                    part.trim()
                        .parse::<u64>()
                        .map_err(|_| format!("bad scale factor `{part}`"))
                })
                .collect::<Result<Vec<u64>, String>>()?,
        };

        let folding = match merged.get("folding") {
            None => Folding::Cnot,
            Some(text) => parse_folding(text)?,
        };

        if estimator == EstimatorChoice::Mitigated || study {
            MitigationPlan::new(scale_factors.clone(), folding, shots)
                .map_err(|e| format!("bad mitigation plan: {e}"))?;
        }

        let seed: u64 = field(&merged, "seed", 1)?;

        let out_dir = merged.get("out_dir").unwrap_or(&"out").to_string();
        if out_dir.is_empty() {
            return Err("out_dir must not be empty".to_string());
        }

        Ok(RunConfig {
            l,
            r_start,
            r_stop,
            r_step,
            estimator,
            shots,
            trials,
            p1,
            p2,
            scale_factors,
            folding,
            seed,
            out_dir,
        })
    }

    pub fn r_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let r = self.r_start + self.r_step * f64::from(k);
            if r > self.r_stop + 1e-9 {
                break;
            }
            out.push(r);
            k += 1;
        }
        out
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel::new(self.p1, self.p2).expect("validated at resolve time")
    }

    pub fn scale_factor_text(&self) -> String {
        let parts: Vec<String> = self.scale_factors.iter().map(u64::to_string).collect();
        parts.join(";")
    }

    /// Canonical serialization: one line per key in schema order. Re-parsing
    /// this text reproduces the identical configuration.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = match key {
                "l" => self.l.to_string(),
                "r_start" => self.r_start.to_string(),
                "r_stop" => self.r_stop.to_string(),
                "r_step" => self.r_step.to_string(),
                "estimator" => self.estimator.label().to_string(),
                "shots" => self.shots.to_string(),
                "trials" => self.trials.to_string(),
                "p1" => self.p1.to_string(),
                "p2" => self.p2.to_string(),
                "scale_factors" => self.scale_factor_text(),
                "folding" => folding_label(self.folding).to_string(),
                "seed" => self.seed.to_string(),
                "out_dir" => self.out_dir.clone(),
                other => unreachable!("unserialized key {other}"),
            };
            let _ = writeln!(out, "{key}={value}");
        }
        out
    }

    /// Hex digest over every field that influences the numbers. The output
    /// directory is excluded so relocated reruns hash identically.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for line in self.canonical().lines() {
            if line.starts_with("out_dir=") {
                continue;
            }
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}
