use std::path::Path;

use num_complex::Complex64;
use riemann_ifs::stats::kac::{DEFAULT_CAP, DEFAULT_INNER_RADIUS};
use riemann_ifs::{Family, IfsSystem};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Run configuration. Every block and field is optional in the input file;
/// the resolved echo lists all of them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemBlock,
    pub run: RunBlock,
    pub probe: ProbeBlock,
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemBlock {
    pub family: Family,
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    /// Probability of map 0 (`f₀`, or `g₂` for the logistic family).
    pub p0: f64,
}

impl Default for SystemBlock {
    fn default() -> Self {
        Self {
            family: Family::Critical,
            lambda: [0.0, 0.5],
            mu: [1.2 * 1f64.cos(), 1.2 * 1f64.sin()],
            p0: 0.6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    pub seed: u64,
    pub n_steps: u64,
    pub trials: u64,
    pub epsilon: f64,
    pub r_far: f64,
    pub burnin: u64,
    pub cap: u64,
    pub z0: [f64; 2],
    /// Return-time samples (kac) or laminar phases (tail).
    pub samples: u64,
    pub inner_radius: f64,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            seed: 1,
            n_steps: 1_000_000,
            trials: 20,
            epsilon: 0.1,
            r_far: 10.0,
            burnin: 1000,
            cap: DEFAULT_CAP,
            z0: [0.05, 0.01],
            samples: 10_000,
            inner_radius: DEFAULT_INNER_RADIUS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeBlock {
    pub qmax: u64,
    pub tol: f64,
    pub depth: usize,
    pub cells: usize,
    #[serde(rename = "K_series")]
    pub k_series: usize,
    pub frontier_budget: usize,
    pub near_radius: f64,
    pub curve_samples: usize,
    pub cycles: usize,
    pub scale: f64,
    /// Hill order statistic count; 0 picks `max(n/20, 10)`.
    pub tail_k: usize,
    pub max_steps: u64,
}

impl Default for ProbeBlock {
    fn default() -> Self {
        Self {
            qmax: riemann_ifs::lambda_class::DEFAULT_QMAX,
            tol: riemann_ifs::lambda_class::DEFAULT_TOL,
            depth: 22,
            cells: 1000,
            k_series: 12,
            frontier_budget: riemann_ifs::stats::coverage::DEFAULT_FRONTIER_BUDGET,
            near_radius: 0.2,
            curve_samples: 1440,
            cycles: 10,
            scale: 5e-3,
            tail_k: 0,
            max_steps: 50_000_000_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Overridden by `--out`; falls back to `RIFS_OUT_DIR`, then `./out`.
    pub directory: Option<String>,
    pub formats: Vec<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
        };
        if cfg.output.formats.is_empty() {
            cfg.output.formats = vec![Format::Csv, Format::Json];
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let r = &self.run;
        let p = &self.probe;
        if !(0.0..=1.0).contains(&self.system.p0) {
            return bad(format!("system.p0 = {} is not a probability", self.system.p0));
        }
        if r.n_steps == 0 || r.trials == 0 || r.samples == 0 || r.cap == 0 {
            return bad("run.n_steps, run.trials, run.samples and run.cap must be positive".into());
        }
        if !(r.epsilon > 0.0 && r.epsilon < 1.0 && r.r_far > 1.0) {
            return bad(format!("need 0 < run.epsilon < 1 < run.r_far, got {} and {}", r.epsilon, r.r_far));
        }
        if !(r.inner_radius > 0.0 && r.inner_radius < 0.5) {
            return bad(format!("run.inner_radius = {} must lie in (0, 0.5)", r.inner_radius));
        }
        if p.qmax == 0 || !(p.tol > 0.0) || p.k_series < 2 || p.cells == 0 || p.frontier_budget == 0 {
            return bad("probe.qmax, probe.tol, probe.cells and probe.frontier_budget must be positive, probe.K_series ≥ 2".into());
        }
        if !(p.near_radius > 0.0 && p.near_radius <= 2.0) {
            return bad(format!("probe.near_radius = {} must lie in (0, 2]", p.near_radius));
        }
        Ok(())
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.system.lambda[0], self.system.lambda[1])
    }

    pub fn mu(&self) -> Complex64 {
        Complex64::new(self.system.mu[0], self.system.mu[1])
    }

    pub fn system(&self) -> Result<IfsSystem, CliError> {
        let s = &self.system;
        let sys = match s.family {
            Family::Critical => IfsSystem::critical(self.lambda(), s.p0),
            Family::Mobius => IfsSystem::mobius(self.mu()).and_then(|m| m.with_p0(s.p0)),
            Family::Logistic => IfsSystem::logistic(s.p0),
        };
        sys.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// JSON Schema of the configuration file. Generated from the defaults so the
/// field list cannot drift from the structs.
pub fn schema() -> serde_json::Value {
    use serde_json::{json, Map, Value};
    fn describe(v: &Value) -> Value {
        match v {
            Value::Object(m) => {
                let props: Map<String, Value> = m.iter().map(|(k, v)| (k.clone(), describe(v))).collect();
                json!({"type": "object", "additionalProperties": false, "properties": props})
            }
            Value::Array(items) => match items.first() {
                Some(Value::Number(_)) => json!({"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}),
                _ => json!({"type": "array", "items": {"enum": ["csv", "json"]}}),
            },
            Value::Number(n) if n.is_u64() => json!({"type": "integer", "minimum": 0, "default": v}),
            Value::Number(_) => json!({"type": "number", "default": v}),
            Value::String(_) => json!({"type": "string", "default": v}),
            Value::Bool(_) => json!({"type": "boolean", "default": v}),
            Value::Null => json!({"type": ["string", "null"]}),
        }
    }
    let mut cfg = RunConfig::default();
    cfg.output.formats = vec![Format::Csv, Format::Json];
    let mut s = describe(&serde_json::to_value(&cfg).expect("config serializes"));
    s["$schema"] = json!("https://json-schema.org/draft/2020-12/schema");
    s["title"] = json!("riemann-ifs run configuration");
    s["properties"]["system"]["properties"]["family"] = json!({"enum": ["critical", "mobius", "logistic"], "default": "critical"});
    s
}
