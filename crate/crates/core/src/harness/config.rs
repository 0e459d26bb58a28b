//! Flat `key = value` experiment configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment to end of line
//! key = value
//! ```
//!
//! Blank lines are ignored, keys may appear at most once and unknown keys are
//! rejected. Every key has a default except `experiment`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lambda::{make_arithmetic_grid, make_cantor, make_lacunary, LambdaSet};

use super::Experiment;

/// Largest exponent accepted for any `2^e` size.
pub const MAX_EXPONENT: u32 = 20;

/// Frequency set recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    /// `points x1 x2 ...`
    Points(Vec<f64>),
    /// `cantor <level> <ratio>` on `[-1/2, 1/2]`.
    Cantor { level: u32, ratio: f64 },
    /// `lacunary <count> <ratio> [offset]`
    Lacunary { count: usize, ratio: f64, offset: f64 },
    /// `grid <count> <origin_gap>`
    Grid { count: usize, origin_gap: f64 },
}

impl LambdaSpec {
    pub fn build(&self) -> Result<LambdaSet> {
        match self {
            LambdaSpec::Points(p) => LambdaSet::new(p.clone()),
            LambdaSpec::Cantor { level, ratio } => make_cantor(*level, *ratio, (-0.5, 0.5)),
            LambdaSpec::Lacunary { count, ratio, offset } => make_lacunary(*count, *ratio, *offset),
            LambdaSpec::Grid { count, origin_gap } => make_arithmetic_grid(*count, *origin_gap),
        }
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Points(p) => {
                write!(f, "points")?;
                for x in p {
                    write!(f, " {x}")?;
                }
                Ok(())
            }
            LambdaSpec::Cantor { level, ratio } => write!(f, "cantor {level} {ratio}"),
            LambdaSpec::Lacunary { count, ratio, offset } => write!(f, "lacunary {count} {ratio} {offset}"),
            LambdaSpec::Grid { count, origin_gap } => write!(f, "grid {count} {origin_gap}"),
        }
    }
}

impl FromStr for LambdaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut words = s.split_whitespace();
        let name = words.next().ok_or("empty frequency set")?;
        let args: Vec<&str> = words.collect();
        let num = |i: usize| -> std::result::Result<f64, String> {
            let w = args.get(i).ok_or(format!("`{name}` needs argument {}", i + 1))?;
            w.parse::<f64>().map_err(|_| format!("`{w}` is not a number"))
        };
        let int = |i: usize| -> std::result::Result<usize, String> {
            let w = args.get(i).ok_or(format!("`{name}` needs argument {}", i + 1))?;
            w.parse::<usize>().map_err(|_| format!("`{w}` is not a nonnegative integer"))
        };
        let arity = |lo: usize, hi: usize| {
            if args.len() < lo || args.len() > hi {
                Err(format!("`{name}` takes {lo}..={hi} arguments, got {}", args.len()))
            } else {
                Ok(())
            }
        };
        match name {
            "points" => {
                if args.is_empty() {
                    return Err("`points` needs at least one value".into());
                }
                Ok(LambdaSpec::Points((0..args.len()).map(num).collect::<std::result::Result<_, _>>()?))
            }
            "cantor" => {
                arity(2, 2)?;
                Ok(LambdaSpec::Cantor {
                    level: int(0)? as u32,
                    ratio: num(1)?,
                })
            }
            "lacunary" => {
                arity(2, 3)?;
                Ok(LambdaSpec::Lacunary {
                    count: int(0)?,
                    ratio: num(1)?,
                    offset: if args.len() == 3 { num(2)? } else { 0.0 },
                })
            }
            "grid" => {
                arity(2, 2)?;
                Ok(LambdaSpec::Grid {
                    count: int(0)?,
                    origin_gap: num(1)?,
                })
            }
            other => Err(format!("unknown constructor `{other}` (points, cantor, lacunary, grid)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: f64,
    pub seed: u64,
    /// Signals live on `[-2^w, 2^w]`.
    pub window_exponent: u32,
    /// Truncations and path lengths are `2^m_max_exponent`.
    pub m_max_exponent: u32,
    pub lambda_spec: LambdaSpec,
    pub grid_exponent: u32,
    pub trials: usize,
    pub r: f64,
    /// Empty means `<experiment>.csv` in the working directory.
    pub output_path: String,
    /// Ensemble size.
    pub paths: usize,
    pub k_min: u32,
    pub k_max: u32,
    /// Single block index for the tail experiment.
    pub k: u32,
    pub epsilon: f64,
    pub gamma: f64,
    pub p: f64,
    pub theta: f64,
    pub d: f64,
    pub grid_points: usize,
}

/// Keys in echo order.
pub const KEYS: [&str; 20] = [
    "experiment",
    "alpha",
    "seed",
    "window_exponent",
    "m_max_exponent",
    "lambda_spec",
    "grid_exponent",
    "trials",
    "r",
    "output_path",
    "paths",
    "k_min",
    "k_max",
    "k",
    "epsilon",
    "gamma",
    "p",
    "theta",
    "d",
    "grid_points",
];

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| bad(key, format!("cannot parse `{value}`")))
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            alpha: 0.5,
            seed: 0,
            window_exponent: 8,
            m_max_exponent: 12,
            lambda_spec: LambdaSpec::Cantor {
                level: 4,
                ratio: 1.0 / 3.0,
            },
            grid_exponent: 12,
            trials: 10,
            r: 1.0,
            output_path: String::new(),
            paths: 10,
            k_min: 5,
            k_max: 11,
            k: 10,
            epsilon: 0.1,
            gamma: 0.3,
            p: 2.0,
            theta: 0.1,
            d: 0.63,
            grid_points: 32,
        }
    }

    /// Parses and validates a whole config file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if entries.iter().any(|(k, _)| k == key) {
                return Err(bad(key, format!("repeated at line {}", i + 1)));
            }
            entries.push((key.to_string(), value.trim().to_string()));
        }
        let exp = entries
            .iter()
            .find(|(k, _)| k == "experiment")
            .ok_or_else(|| bad("experiment", "missing"))?;
        let mut cfg = Self::new(parse_experiment(&exp.1)?);
        for (k, v) in &entries {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text form. Does not validate ranges.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "experiment" => self.experiment = parse_experiment(value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "window_exponent" => self.window_exponent = parse_value(key, value)?,
            "m_max_exponent" => self.m_max_exponent = parse_value(key, value)?,
            "lambda_spec" => self.lambda_spec = value.parse().map_err(|e: String| bad(key, e))?,
            "grid_exponent" => self.grid_exponent = parse_value(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "r" => self.r = parse_value(key, value)?,
            "output_path" => self.output_path = value.to_string(),
            "paths" => self.paths = parse_value(key, value)?,
            "k_min" => self.k_min = parse_value(key, value)?,
            "k_max" => self.k_max = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            "p" => self.p = parse_value(key, value)?,
            "theta" => self.theta = parse_value(key, value)?,
            "d" => self.d = parse_value(key, value)?,
            "grid_points" => self.grid_points = parse_value(key, value)?,
            other => return Err(bad(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| bad(kv, "override must look like key=value"))?;
        self.set(k.trim(), v)?;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !(1.0..2.0).contains(&self.r) {
            return Err(bad("r", format!("{} not in [1, 2)", self.r)));
        }
        for (key, v) in [
            ("window_exponent", self.window_exponent),
            ("m_max_exponent", self.m_max_exponent),
            ("grid_exponent", self.grid_exponent),
            ("k_min", self.k_min),
            ("k_max", self.k_max),
            ("k", self.k),
        ] {
            if v > MAX_EXPONENT {
                return Err(bad(key, format!("{v} exceeds {MAX_EXPONENT}")));
            }
        }
        if self.k_min > self.k_max {
            return Err(bad("k_min", format!("{} above k_max = {}", self.k_min, self.k_max)));
        }
        for (key, v) in [("trials", self.trials), ("paths", self.paths), ("grid_points", self.grid_points)] {
            if v == 0 {
                return Err(bad(key, "must be positive"));
            }
        }
        for (key, v) in [("epsilon", self.epsilon), ("theta", self.theta), ("gamma", self.gamma), ("p", self.p), ("d", self.d)] {
            if !v.is_finite() {
                return Err(bad(key, "must be finite"));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(bad("epsilon", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.d) {
            return Err(bad("d", format!("{} not in [0, 1)", self.d)));
        }
        self.lambda_spec.build().map_err(|e| bad("lambda_spec", e.to_string()))?;
        Ok(())
    }

    pub fn output_path(&self) -> PathBuf {
        if self.output_path.is_empty() {
            PathBuf::from(format!("{}.csv", self.experiment.name()))
        } else {
            PathBuf::from(&self.output_path)
        }
    }

    /// Text form of one key, as echoed into result files.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "experiment" => self.experiment.name().to_string(),
            "alpha" => self.alpha.to_string(),
            "seed" => self.seed.to_string(),
            "window_exponent" => self.window_exponent.to_string(),
            "m_max_exponent" => self.m_max_exponent.to_string(),
            "lambda_spec" => self.lambda_spec.to_string(),
            "grid_exponent" => self.grid_exponent.to_string(),
            "trials" => self.trials.to_string(),
            "r" => self.r.to_string(),
            "output_path" => self.output_path.clone(),
            "paths" => self.paths.to_string(),
            "k_min" => self.k_min.to_string(),
            "k_max" => self.k_max.to_string(),
            "k" => self.k.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "gamma" => self.gamma.to_string(),
            "p" => self.p.to_string(),
            "theta" => self.theta.to_string(),
            "d" => self.d.to_string(),
            "grid_points" => self.grid_points.to_string(),
            _ => return None,
        })
    }

    /// All keys in echo order, in the same grammar [`ExperimentConfig::parse`] reads.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }
}

fn parse_experiment(value: &str) -> Result<Experiment> {
    value.parse().map_err(|_| {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        bad("experiment", format!("unknown experiment `{value}`; expected one of {}", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_defaults() {
        let cfg = ExperimentConfig::parse(
            "# decay run\nexperiment = pk-decay\nalpha = 0.5 # half\n\nseed=42\nlambda_spec = points 0.1 -0.2\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::PkDecay);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.lambda_spec, LambdaSpec::Points(vec![0.1, -0.2]));
        assert_eq!(cfg.trials, 10);
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = ExperimentConfig::new(Experiment::Sobolev);
        cfg.set("lambda_spec", "lacunary 8 0.5 -0.25").unwrap();
        cfg.set("alpha", "0.3").unwrap();
        let again = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_key() {
        let msg = |t: &str| ExperimentConfig::parse(t).unwrap_err().to_string();
        assert!(msg("experiment = tails\nalpha = 1.5\n").contains("alpha"));
        assert!(msg("experiment = tails\nr = 2\n").contains("`r`"));
        assert!(msg("experiment = tails\ngrid_exponent = 21\n").contains("grid_exponent"));
        assert!(msg("experiment = tails\nbogus = 1\n").contains("bogus"));
        assert!(msg("experiment = nope\n").contains("experiment"));
        assert!(msg("alpha = 0.5\n").contains("experiment"));
        assert!(msg("experiment = tails\nseed = 1\nseed = 2\n").contains("seed"));
        assert!(msg("experiment = tails\nlambda_spec = cantor 3\n").contains("lambda_spec"));
        assert!(msg("experiment = tails\njust words\n").contains("line 2"));
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::new(Experiment::Tails);
        cfg.apply_override("k=9").unwrap();
        assert_eq!(cfg.k, 9);
        assert!(cfg.apply_override("alpha=0").is_err());
        assert!(cfg.apply_override("alpha").is_err());
    }

    #[test]
    fn lambda_constructors() {
        for s in ["points 0.25", "cantor 3 0.3", "lacunary 5 0.5", "grid 4 0.1"] {
            let spec: LambdaSpec = s.parse().unwrap();
            assert!(!spec.build().unwrap().is_empty());
            assert_eq!(spec.to_string().parse::<LambdaSpec>().unwrap(), spec);
        }
        assert!("wavelet 3".parse::<LambdaSpec>().is_err());
        assert!("points".parse::<LambdaSpec>().is_err());
    }
}
