use crate::error::{io_err, Result, StudyError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use trimext::geometry::BoundaryCurve;
use trimext::interpolation::WeightMode;
use trimext::problems::{named_domain, NamedDomain};

/// Settings shared by every study. The JSON config file has the same field
/// names; command-line flags override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// `bean`, `circle`, `cone-circle` or a path to a JSON list of `(theta, x, y)` records.
    pub domain: String,
    pub p: Vec<usize>,
    pub gamma: Vec<f64>,
    #[serde(deserialize_with = "de_mesh_sizes")]
    pub h: Vec<f64>,
    pub shifts: usize,
    /// Nitsche penalty; `25 p^2` when absent.
    pub beta: Option<f64>,
    pub weights: WeightMode,
    /// Gauss points per direction; `p + 2` when absent.
    pub quad_order: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
    /// Largest matrix whose condition number is computed from dense eigenvalues.
    pub dense_limit: usize,
    /// Random inputs per shift in the diagnostics study.
    pub samples: usize,
    /// Write 0 in the wall-time column so repeated runs are byte-identical.
    pub no_timing: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            domain: "bean".into(),
            p: vec![2],
            gamma: vec![1.0],
            h: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            shifts: 10,
            beta: None,
            weights: WeightMode::CutArea,
            quad_order: None,
            seed: 1,
            out: PathBuf::from("out"),
            dense_limit: 1500,
            samples: 50,
            no_timing: false,
        }
    }
}

/// Flag values; `None` and empty lists leave the config untouched.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub domain: Option<String>,
    pub p: Vec<usize>,
    pub gamma: Vec<f64>,
    pub h: Vec<f64>,
    pub shifts: Option<usize>,
    pub beta: Option<f64>,
    pub weights: Option<WeightMode>,
    pub quad_order: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dense_limit: Option<usize>,
    pub samples: Option<usize>,
    pub no_timing: bool,
}

/// `0.0625` or `1/16`.
pub fn parse_mesh_size(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad mesh size '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad mesh size '{s}'"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("bad mesh size '{s}'"))?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("mesh size must be positive, got '{s}'"))
    }
}

fn de_mesh_sizes<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Size {
        Num(f64),
        Text(String),
    }
    Vec::<Size>::deserialize(d)?
        .into_iter()
        .map(|s| match s {
            Size::Num(v) => Ok(v),
            Size::Text(t) => parse_mesh_size(&t).map_err(serde::de::Error::custom),
        })
        .collect()
}

impl StudyConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| StudyError::Json { path: path.display().to_string(), source })
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.domain {
            self.domain = v;
        }
        if !o.p.is_empty() {
            self.p = o.p;
        }
        if !o.gamma.is_empty() {
            self.gamma = o.gamma;
        }
        if !o.h.is_empty() {
            self.h = o.h;
        }
        if let Some(v) = o.shifts {
            self.shifts = v;
        }
        if o.beta.is_some() {
            self.beta = o.beta;
        }
        if let Some(v) = o.weights {
            self.weights = v;
        }
        if o.quad_order.is_some() {
            self.quad_order = o.quad_order;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.out {
            self.out = v;
        }
        if let Some(v) = o.dense_limit {
            self.dense_limit = v;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        self.no_timing |= o.no_timing;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(StudyError::Config(m));
        if self.p.is_empty() || self.gamma.is_empty() || self.h.is_empty() {
            return bad("p, gamma and h lists must not be empty".into());
        }
        if let Some(&p) = self.p.iter().find(|&&p| !(1..=3).contains(&p)) {
            return bad(format!("degree {p} is not in 1..=3"));
        }
        if let Some(&g) = self.gamma.iter().find(|&&g| !(0.0..=1.0).contains(&g)) {
            return bad(format!("gamma {g} is not in [0, 1]"));
        }
        if self.h.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return bad("mesh sizes must be positive".into());
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return bad("mesh sizes must be strictly decreasing".into());
        }
        if self.shifts == 0 {
            return bad("at least one shift is needed".into());
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("penalty {b} must be positive"));
            }
        }
        if self.quad_order == Some(0) {
            return bad("quadrature order must be at least 1".into());
        }
        if self.samples == 0 {
            return bad("at least one sample is needed".into());
        }
        Ok(())
    }

    pub fn quad_order(&self, p: usize) -> usize {
        self.quad_order.unwrap_or(p + 2)
    }

    pub fn beta(&self, p: usize) -> f64 {
        self.beta.unwrap_or_else(|| trimext::nitsche::default_penalty(p))
    }

    /// SHA-256 over the settings that affect results, and the domain file if any.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.no_timing = false;
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&c).expect("config serializes"));
        if is_domain_file(&self.domain) {
            let path = Path::new(&self.domain);
            hasher.update(std::fs::read(path).map_err(io_err(path))?);
        }
        Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn is_domain_file(domain: &str) -> bool {
    !matches!(domain, "bean" | "circle" | "cone-circle")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Record {
    Tuple(f64, f64, f64),
    Named { theta: f64, x: f64, y: f64 },
}

/// Built-in domain by name, or a spline boundary from a JSON record file.
pub fn load_domain(domain: &str) -> Result<NamedDomain> {
    if !is_domain_file(domain) {
        return Ok(named_domain(domain)?);
    }
    let path = Path::new(domain);
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let records: Vec<Record> =
        serde_json::from_str(&text).map_err(|source| StudyError::Json { path: domain.into(), source })?;
    let records: Vec<(f64, f64, f64)> = records
        .into_iter()
        .map(|r| match r {
            Record::Tuple(t, x, y) | Record::Named { theta: t, x, y } => (t, x, y),
        })
        .collect();
    Ok(NamedDomain { curve: BoundaryCurve::from_records(&records)?, map: None })
}

/// Fractional mesh offsets in `[0, 1)^2`, one per shift; the offset of a
/// mesh of size `h` is the fraction times `h`.
pub fn shift_fractions(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect()
}
