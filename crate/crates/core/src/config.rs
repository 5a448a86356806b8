//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Keys left out take per-experiment defaults.
//!
//! ```text
//! experiment = noise-curve
//! n = 256
//! sigmas = 0, 0.05, 0.1
//! trials = 5
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Radar,
    DiracComb,
    NoiseCurve,
    Constants,
    CoefficientDecay,
    MethodComparison,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Radar,
        ExperimentKind::DiracComb,
        ExperimentKind::NoiseCurve,
        ExperimentKind::Constants,
        ExperimentKind::CoefficientDecay,
        ExperimentKind::MethodComparison,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Radar => "radar",
            ExperimentKind::DiracComb => "dirac-comb",
            ExperimentKind::NoiseCurve => "noise-curve",
            ExperimentKind::Constants => "constants",
            ExperimentKind::CoefficientDecay => "coefficient-decay",
            ExperimentKind::MethodComparison => "method-comparison",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: Option<usize>,
    pub m: Option<usize>,
    /// Number of atoms; must be a multiple of `n`. Alternative to `oversampling`.
    pub d: Option<usize>,
    pub oversampling: Option<usize>,
    /// Gabor time step `a` in samples.
    pub time_step: Option<usize>,
    /// Sparsity level used by the audits.
    pub s: Option<usize>,
    /// Relative noise levels `sqrt(m) sigma / |A f|_2`.
    pub sigmas: Option<Vec<f64>>,
    pub trials: Option<usize>,
    /// Total solves of the reweighted method, the first one unweighted.
    pub rw_iters: Option<usize>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub tol_rel: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 14] = [
        "experiment",
        "n",
        "m",
        "d",
        "oversampling",
        "time_step",
        "s",
        "sigmas",
        "trials",
        "rw_iters",
        "seed",
        "max_iter",
        "tol_rel",
        "output_dir",
    ];

    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            n: None,
            m: None,
            d: None,
            oversampling: None,
            time_step: None,
            s: None,
            sigmas: None,
            trials: None,
            rw_iters: None,
            seed: None,
            max_iter: None,
            tol_rel: None,
            output_dir: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if pairs.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Parse(format!("line {}: duplicate key {k:?}", i + 1)));
            }
            pairs.push((k, v));
        }
        let experiment = pairs
            .iter()
            .find(|(k, _)| *k == "experiment")
            .ok_or_else(|| Error::Parse("config is missing the experiment key".into()))?
            .1
            .parse()?;
        let mut cfg = Self::new(experiment);
        for (k, v) in pairs.into_iter().filter(|(k, _)| *k != "experiment") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn p<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim().parse().map_err(|_| Error::Parse(format!("invalid value {v:?} for {key}")))
        }
        match key {
            "experiment" => self.experiment = value.parse()?,
            "n" => self.n = Some(p(key, value)?),
            "m" => self.m = Some(p(key, value)?),
            "d" => self.d = Some(p(key, value)?),
            "oversampling" => self.oversampling = Some(p(key, value)?),
            "time_step" => self.time_step = Some(p(key, value)?),
            "s" => self.s = Some(p(key, value)?),
            "sigmas" => {
                self.sigmas = Some(value.split(',').map(|v| p(key, v)).collect::<Result<_>>()?);
            }
            "trials" => self.trials = Some(p(key, value)?),
            "rw_iters" => self.rw_iters = Some(p(key, value)?),
            "seed" => self.seed = Some(p(key, value)?),
            "max_iter" => self.max_iter = Some(p(key, value)?),
            "tol_rel" => self.tol_rel = Some(p(key, value)?),
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n", self.n),
            ("m", self.m),
            ("d", self.d),
            ("oversampling", self.oversampling),
            ("time_step", self.time_step),
            ("s", self.s),
            ("trials", self.trials),
            ("rw_iters", self.rw_iters),
            ("max_iter", self.max_iter),
        ];
        for (name, v) in positive {
            if v == Some(0) {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if let (Some(n), Some(d)) = (self.n, self.d) {
            if d % n != 0 {
                return Err(Error::InvalidParameter(format!("d = {d} is not a multiple of n = {n}")));
            }
            if let Some(o) = self.oversampling {
                if d != o * n {
                    return Err(Error::InvalidParameter(format!("d = {d} disagrees with oversampling {o} at n = {n}")));
                }
            }
        }
        if let Some(sig) = &self.sigmas {
            if sig.is_empty() || sig.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
                return Err(Error::InvalidParameter("sigmas must be a non-empty list of non-negative numbers".into()));
            }
        }
        if let Some(t) = self.tol_rel {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("tol_rel must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Redundancy `d / n` if either key is set.
    pub fn redundancy(&self) -> Option<usize> {
        self.oversampling.or_else(|| Some(self.d? / self.n?))
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("experiment = {}\n", self.experiment);
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!("{k} = {v}\n"));
            }
        };
        put("n", self.n.map(|v| v.to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("d", self.d.map(|v| v.to_string()));
        put("oversampling", self.oversampling.map(|v| v.to_string()));
        put("time_step", self.time_step.map(|v| v.to_string()));
        put("s", self.s.map(|v| v.to_string()));
        put("sigmas", self.sigmas.as_ref().map(|v| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")));
        put("trials", self.trials.map(|v| v.to_string()));
        put("rw_iters", self.rw_iters.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("max_iter", self.max_iter.map(|v| v.to_string()));
        put("tol_rel", self.tol_rel.map(num));
        put("output_dir", self.output_dir.as_ref().map(|p| p.display().to_string()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_serialize() {
        let text = "# noise study\nexperiment = noise-curve\n\nn = 256\nsigmas = 0, 0.05,0.1\ntrials=5\nseed = 7\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::NoiseCurve);
        assert_eq!(cfg.n, Some(256));
        assert_eq!(cfg.sigmas.as_deref(), Some(&[0.0, 0.05, 0.1][..]));
        let out = cfg.serialize();
        assert_eq!(out, "experiment = noise-curve\nn = 256\nsigmas = 0.0, 0.05, 0.1\ntrials = 5\nseed = 7\n");
        assert_eq!(ExperimentConfig::parse(&out).unwrap(), cfg);
    }

    #[test]
    fn errors() {
        assert!(ExperimentConfig::parse("n = 3\n").is_err());
        assert!(ExperimentConfig::parse("experiment = nope\n").is_err());
        assert!(ExperimentConfig::parse("experiment = radar\nn = 3\nn = 4\n").is_err());
        assert!(ExperimentConfig::parse("experiment = radar\ncolour = red\n").is_err());
        assert!(ExperimentConfig::parse("experiment = radar\ntrials = 0\n").is_err());
        assert!(ExperimentConfig::parse("experiment = radar\nn = 10\nd = 25\n").is_err());
        assert!(ExperimentConfig::parse("experiment = radar\nsigmas = 0.1, -1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = radar\nm\n").is_err());
    }

    #[test]
    fn redundancy_from_d() {
        let cfg = ExperimentConfig::parse("experiment = radar\nn = 8\nd = 32\n").unwrap();
        assert_eq!(cfg.redundancy(), Some(4));
    }

    #[test]
    fn every_kind_round_trips_by_name() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
