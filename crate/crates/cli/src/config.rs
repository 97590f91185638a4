//! Flat key=value run configuration with sections, plus command-line
//! overrides. Plain text only, so experiment provenance diffs cleanly.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [model]
    pub l_ks: usize,
    pub a_g: f64,
    pub m_over_g: f64,
    // [thermo]
    pub beta_g: Vec<f64>,
    pub mu_over_g: Vec<f64>,
    // [ite]
    pub delta_beta: f64,
    // [chain]
    pub n_chain: usize,
    pub n_burn: usize,
    pub estimator: String,
    pub basis_schedule: String,
    pub seed: u64,
    pub initial_state: String,
    // [stats]
    pub window: usize,
    // [limits]
    pub dense_max_qubits: usize,
    // [variance]
    pub n_tau_steps: usize,
    pub n_est: usize,
    pub n_shot: usize,
    pub repetitions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            l_ks: 4,
            a_g: 0.25,
            m_over_g: 0.01,
            // Covers the low- and high-temperature regimes with the three
            // anchor values 0.4, 1.0, 14.0 always present.
            beta_g: vec![0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 11.0, 14.0],
            mu_over_g: vec![0.0],
            delta_beta: 0.01,
            n_chain: 1000,
            n_burn: 0,
            estimator: "single_shot".into(),
            basis_schedule: "alternate".into(),
            seed: 20260809,
            initial_state: "auto".into(),
            window: 10,
            dense_max_qubits: 16,
            n_tau_steps: 20000,
            n_est: 2000,
            n_shot: 10,
            repetitions: 50,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse_f64(v: &str, key: &str) -> Result<f64, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected a number, got {v:?}")))
}

fn parse_usize(v: &str, key: &str) -> Result<usize, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected an integer, got {v:?}")))
}

fn parse_list(v: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
    let out: Result<Vec<f64>, _> = v.split(',').map(|s| parse_f64(s, key)).collect();
    let out = out?;
    if out.is_empty() {
        return Err(ConfigError(format!("{key}: list must be nonempty")));
    }
    Ok(out)
}

impl RunConfig {
    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let full = format!("{section}.{key}");
        match (section, key) {
            ("model", "l_ks") => self.l_ks = parse_usize(value, &full)?,
            ("model", "a_g") => self.a_g = parse_f64(value, &full)?,
            ("model", "m_over_g") => self.m_over_g = parse_f64(value, &full)?,
            ("thermo", "beta_g") => self.beta_g = parse_list(value, &full)?,
            ("thermo", "mu_over_g") => self.mu_over_g = parse_list(value, &full)?,
            ("ite", "delta_beta") => self.delta_beta = parse_f64(value, &full)?,
            ("chain", "n_chain") => self.n_chain = parse_usize(value, &full)?,
            ("chain", "n_burn") => self.n_burn = parse_usize(value, &full)?,
            ("chain", "estimator") => self.estimator = value.trim().into(),
            ("chain", "basis_schedule") => self.basis_schedule = value.trim().into(),
            ("chain", "seed") => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("{full}: expected u64, got {value:?}")))?
            }
            ("chain", "initial_state") => self.initial_state = value.trim().into(),
            ("stats", "window") => self.window = parse_usize(value, &full)?,
            ("limits", "dense_max_qubits") => self.dense_max_qubits = parse_usize(value, &full)?,
            ("variance", "n_tau_steps") => self.n_tau_steps = parse_usize(value, &full)?,
            ("variance", "n_est") => self.n_est = parse_usize(value, &full)?,
            ("variance", "n_shot") => self.n_shot = parse_usize(value, &full)?,
            ("variance", "repetitions") => self.repetitions = parse_usize(value, &full)?,
            _ => return Err(ConfigError(format!("unknown config key {full}"))),
        }
        Ok(())
    }

    pub fn parse_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected key = value, got {line:?}",
                    lineno + 1
                )));
            };
            if section.is_empty() {
                return Err(ConfigError(format!(
                    "line {}: key outside any [section]",
                    lineno + 1
                )));
            }
            self.apply(&section, key.trim(), value)?;
        }
        Ok(())
    }

    /// One `--set section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let Some((path, value)) = spec.split_once('=') else {
            return Err(ConfigError(format!(
                "--set expects section.key=value, got {spec:?}"
            )));
        };
        let Some((section, key)) = path.trim().split_once('.') else {
            return Err(ConfigError(format!(
                "--set expects section.key=value, got {spec:?}"
            )));
        };
        self.apply(section, key.trim(), value)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.l_ks < 2 {
            return Err(ConfigError("model.l_ks must be >= 2".into()));
        }
        let positive = |v: f64| v.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater);
        if !positive(self.a_g) {
            return Err(ConfigError("model.a_g must be positive".into()));
        }
        if !positive(self.delta_beta) {
            return Err(ConfigError("ite.delta_beta must be positive".into()));
        }
        if self.n_chain == 0 {
            return Err(ConfigError("chain.n_chain must be >= 1".into()));
        }
        if !matches!(self.basis_schedule.as_str(), "alternate" | "z_only") {
            return Err(ConfigError(format!(
                "chain.basis_schedule must be alternate or z_only, got {:?}",
                self.basis_schedule
            )));
        }
        self.estimator_mode().map(|_| ())
    }

    pub fn estimator_mode(&self) -> Result<z2metts::qmetts::EstimatorMode, ConfigError> {
        use z2metts::qmetts::EstimatorMode;
        match self.estimator.as_str() {
            "exact" => Ok(EstimatorMode::Exact),
            "single_shot" => Ok(EstimatorMode::SingleShot),
            s => {
                if let Some(n) = s.strip_prefix("multi_shot:") {
                    let n: usize = n.parse().map_err(|_| {
                        ConfigError(format!("chain.estimator multi_shot:N needs integer N, got {s:?}"))
                    })?;
                    if n == 0 {
                        return Err(ConfigError("multi_shot shot count must be >= 1".into()));
                    }
                    Ok(EstimatorMode::MultiShot(n))
                } else {
                    Err(ConfigError(format!(
                        "chain.estimator must be exact, single_shot, or multi_shot:N, got {s:?}"
                    )))
                }
            }
        }
    }

    pub fn schedule(&self) -> z2metts::qmetts::BasisSchedule {
        match self.basis_schedule.as_str() {
            "z_only" => z2metts::qmetts::BasisSchedule::ZOnly,
            _ => z2metts::qmetts::BasisSchedule::Alternate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_cover_anchors() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        for anchor in [0.4, 1.0, 14.0] {
            assert!(cfg.beta_g.contains(&anchor));
        }
        assert!(cfg.beta_g.len() >= 10);
    }

    #[test]
    fn file_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.parse_file(
            "# comment\n[model]\nl_ks = 2\n\n[thermo]\nbeta_g = 0.5, 1.5\n[chain]\nseed = 99\n",
        )
        .unwrap();
        assert_eq!(cfg.l_ks, 2);
        assert_eq!(cfg.beta_g, vec![0.5, 1.5]);
        assert_eq!(cfg.seed, 99);
        cfg.apply_override("chain.n_chain=42").unwrap();
        assert_eq!(cfg.n_chain, 42);
        assert!(cfg.apply_override("nonsense").is_err());
        assert!(cfg.apply_override("model.bogus=1").is_err());
    }

    #[test]
    fn estimator_modes_parse() {
        let mut cfg = RunConfig::default();
        cfg.estimator = "multi_shot:5".into();
        assert!(matches!(
            cfg.estimator_mode().unwrap(),
            z2metts::qmetts::EstimatorMode::MultiShot(5)
        ));
        cfg.estimator = "bogus".into();
        assert!(cfg.estimator_mode().is_err());
    }
}
