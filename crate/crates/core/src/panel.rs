//! Panel indexing, direct-estimate tables, model settings and the
//! sampler's parameter state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area-major panel layout: the first `n_times` flat entries are area 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelIndex {
    n_areas: usize,
    n_times: usize,
}

impl PanelIndex {
    pub fn new(n_areas: usize, n_times: usize) -> Result<Self> {
        if n_areas == 0 || n_times == 0 {
            return Err(Error::InvalidSpec(format!(
                "panel must have at least one area and one time (got {n_areas}x{n_times})"
            )));
        }
        Ok(Self { n_areas, n_times })
    }

    pub fn n_areas(&self) -> usize {
        self.n_areas
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn len(&self) -> usize {
        self.n_areas * self.n_times
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 0-based `(area, time)` to flat position.
    #[inline]
    pub fn flat(&self, area: usize, time: usize) -> usize {
        debug_assert!(area < self.n_areas && time < self.n_times);
        area * self.n_times + time
    }

    #[inline]
    pub fn unflat(&self, i: usize) -> (usize, usize) {
        (i / self.n_times, i % self.n_times)
    }

    pub fn checked_flat(&self, area: usize, time: usize) -> Result<usize> {
        if area >= self.n_areas || time >= self.n_times {
            return Err(Error::OutOfRangeCell {
                area: area + 1,
                time: time + 1,
                n_areas: self.n_areas,
                n_times: self.n_times,
            });
        }
        Ok(self.flat(area, time))
    }

    /// Flat range covering all times of one area.
    pub fn area_range(&self, area: usize) -> std::ops::Range<usize> {
        area * self.n_times..(area + 1) * self.n_times
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MissClass {
    Observed,
    NoPlots,
    SinglePlot,
    ZeroVariance,
}

impl MissClass {
    /// Classifies a cell from its sample size and direct statistics.
    ///
    /// A cell with `n >= 2` but no variance is treated like a single-plot
    /// cell: its direct variance is unavailable, so it is missing.
    pub fn classify(n: usize, mu_hat: Option<f64>, sigma2_hat: Option<f64>) -> Self {
        match (n, mu_hat, sigma2_hat) {
            (0, _, _) | (_, None, _) => MissClass::NoPlots,
            (1, _, _) | (_, _, None) => MissClass::SinglePlot,
            (_, _, Some(v)) if v == 0.0 => MissClass::ZeroVariance,
            _ => MissClass::Observed,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MissClass::Observed => "OBSERVED",
            MissClass::NoPlots => "NO_PLOTS",
            MissClass::SinglePlot => "SINGLE_PLOT",
            MissClass::ZeroVariance => "ZERO_VARIANCE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub mu_hat: Option<f64>,
    pub sigma2_hat: Option<f64>,
    pub class: MissClass,
}

impl Cell {
    pub fn new(n: usize, mu_hat: Option<f64>, sigma2_hat: Option<f64>) -> Result<Self> {
        if let Some(m) = mu_hat {
            if !m.is_finite() {
                return Err(Error::InvalidSpec(format!("direct mean {m} is not finite")));
            }
        }
        if let Some(v) = sigma2_hat {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSpec(format!("direct variance {v} must be finite and >= 0")));
            }
        }
        let class = MissClass::classify(n, mu_hat, sigma2_hat);
        let (mu_hat, sigma2_hat) = match class {
            MissClass::NoPlots => (None, None),
            MissClass::SinglePlot => (mu_hat, None),
            _ => (mu_hat, sigma2_hat),
        };
        Ok(Self {
            n,
            mu_hat,
            sigma2_hat,
            class,
        })
    }

    pub fn empty() -> Self {
        Self {
            n: 0,
            mu_hat: None,
            sigma2_hat: None,
            class: MissClass::NoPlots,
        }
    }

    pub fn is_observed(&self) -> bool {
        self.class == MissClass::Observed
    }
}

/// Direct estimates for every panel cell, in flat order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectTable {
    index: PanelIndex,
    cells: Vec<Cell>,
}

impl DirectTable {
    pub fn new(index: PanelIndex, cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != index.len() {
            return Err(Error::InvalidSpec(format!(
                "table has {} cells, panel needs {}",
                cells.len(),
                index.len()
            )));
        }
        Ok(Self { index, cells })
    }

    pub fn index(&self) -> PanelIndex {
        self.index
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, area: usize, time: usize) -> &Cell {
        &self.cells[self.index.flat(area, time)]
    }

    /// Flat positions of OBSERVED cells, ascending.
    pub fn observed(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_observed())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, class: MissClass) -> usize {
        self.cells.iter().filter(|c| c.class == class).count()
    }
}

/// Complete area-level covariates, one flat-ordered column per predictor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Covariates {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

impl Covariates {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidSpec("covariate names and columns differ in count".into()));
        }
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(Error::InvalidSpec("covariate columns differ in length".into()));
            }
        }
        Ok(Self { names, columns })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Centers each column and scales it to unit sample variance.
    ///
    /// Constant columns are centered only (sd recorded as 1).
    pub fn standardize(&mut self) -> Vec<Standardization> {
        self.names
            .iter()
            .zip(self.columns.iter_mut())
            .map(|(name, col)| {
                let n = col.len() as f64;
                let mean = col.iter().sum::<f64>() / n;
                let ss: f64 = col.iter().map(|x| (x - mean).powi(2)).sum();
                let sd = if col.len() > 1 && ss > 0.0 { (ss / (n - 1.0)).sqrt() } else { 1.0 };
                for x in col.iter_mut() {
                    *x = (*x - mean) / sd;
                }
                Standardization {
                    name: name.clone(),
                    mean,
                    sd,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Space-time intercept plus space-varying coefficients.
    Full,
    /// Space-time intercept only.
    Sub1,
    /// Area-specific AR(1) intercept, no spatial dependence.
    Sub2,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Sub1 => "sub1",
            Variant::Sub2 => "sub2",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Variant::Full => 0,
            Variant::Sub1 => 1,
            Variant::Sub2 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Variant::Full),
            1 => Some(Variant::Sub1),
            2 => Some(Variant::Sub2),
            _ => None,
        }
    }

    /// Whether the intercept process carries a CAR spatial factor.
    pub fn is_spatial(&self) -> bool {
        !matches!(self, Variant::Sub2)
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Variant::Full),
            "sub1" => Ok(Variant::Sub1),
            "sub2" => Ok(Variant::Sub2),
            other => Err(Error::InvalidSpec(format!("unknown model variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const UNIT: Bounds = Bounds { lower: 0.0, upper: 1.0 };

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub mu_beta: f64,
    pub sigma2_beta: f64,
    /// Shape shared by the inverse-gamma priors on σ²_ε and the process variances.
    pub shape: f64,
    pub b_eps: f64,
    pub b_eta0: f64,
    pub b_eta_s: f64,
    pub rho: Bounds,
    pub alpha: Bounds,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            mu_beta: 0.0,
            sigma2_beta: 1e5,
            shape: 2.0,
            b_eps: 1.0,
            b_eta0: 1.0,
            b_eta_s: 1.0,
            rho: Bounds::UNIT,
            alpha: Bounds::UNIT,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma2_beta", self.sigma2_beta),
            ("shape", self.shape),
            ("b_eps", self.b_eps),
            ("b_eta0", self.b_eta0),
            ("b_eta_s", self.b_eta_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!("prior {name} must be > 0 (got {v})")));
            }
        }
        if !self.mu_beta.is_finite() {
            return Err(Error::InvalidSpec("prior mu_beta must be finite".into()));
        }
        for (name, b) in [("rho", self.rho), ("alpha", self.alpha)] {
            if !(0.0 <= b.lower && b.lower < b.upper && b.upper <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "{name} bounds must satisfy 0 <= lower < upper <= 1 (got {}, {})",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }
}

/// Which model to fit and which covariates carry spatially varying effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    /// Indices into the covariate columns for the `q` space-varying terms.
    pub svc: Vec<usize>,
    pub priors: PriorConfig,
}

impl ModelSpec {
    pub fn new(variant: Variant, svc: Vec<usize>, priors: PriorConfig) -> Self {
        Self { variant, svc, priors }
    }

    pub fn q(&self) -> usize {
        self.svc.len()
    }

    /// Checks the model settings against `p` available covariates.
    pub fn validate(&self, p: usize) -> Result<()> {
        self.priors.validate()?;
        let q = self.svc.len();
        match self.variant {
            Variant::Full if q == 0 => {
                return Err(Error::InvalidSpec("the full model needs at least one space-varying covariate".into()))
            }
            Variant::Sub1 | Variant::Sub2 if q > 0 => {
                return Err(Error::InvalidSpec(format!(
                    "{} has no space-varying covariates",
                    self.variant.as_str()
                )))
            }
            _ => {}
        }
        if q > p {
            return Err(Error::InvalidSpec(format!("q = {q} exceeds p = {p}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &k in &self.svc {
            if k >= p {
                return Err(Error::InvalidSpec(format!("space-varying covariate {k} not among the {p} covariates")));
            }
            if !seen.insert(k) {
                return Err(Error::InvalidSpec(format!("space-varying covariate {k} listed twice")));
            }
        }
        Ok(())
    }
}

/// One complete MCMC state.
///
/// `eta0` is the space-time intercept for FULL/SUB1 and the area-wise AR(1)
/// intercept for SUB2. `sigma2_cell` is `Some` exactly on OBSERVED cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    pub mu: Vec<f64>,
    pub beta: Vec<f64>,
    pub eta0: Vec<f64>,
    pub eta_s: Vec<Vec<f64>>,
    pub sigma2_cell: Vec<Option<f64>>,
    pub sigma2_eps: f64,
    pub sigma2_eta0: f64,
    pub sigma2_eta_s: Vec<f64>,
    /// CAR correlation of the intercept process; `None` for SUB2.
    pub rho_eta0: Option<f64>,
    pub alpha_eta0: f64,
    pub rho_eta_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    LengthMismatch,
    NegativeVariance,
    NonFinite,
    CorrelationOnBoundary,
    CorrelationOutOfBounds,
    VariantMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub field: String,
}

/// Lists every invariant the state breaks; an empty list means valid.
pub fn validate_state(state: &ParameterState, spec: &ModelSpec, index: &PanelIndex, p: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, field: &str| {
        out.push(Violation {
            code,
            field: field.to_string(),
        })
    };
    let n = index.len();
    let j = index.n_areas();
    let q = spec.q();

    let vector = |name: &str, v: &[f64], len: usize, push: &mut dyn FnMut(ViolationCode, &str)| {
        if v.len() != len {
            push(ViolationCode::LengthMismatch, name);
        }
        if v.iter().any(|x| !x.is_finite()) {
            push(ViolationCode::NonFinite, name);
        }
    };
    vector("mu", &state.mu, n, &mut push);
    vector("beta", &state.beta, p + 1, &mut push);
    vector("eta0", &state.eta0, n, &mut push);
    if state.eta_s.len() != q {
        push(ViolationCode::LengthMismatch, "eta_s");
    }
    for (k, e) in state.eta_s.iter().enumerate() {
        vector(&format!("eta_s[{k}]"), e, j, &mut push);
    }

    if state.sigma2_cell.len() != n {
        push(ViolationCode::LengthMismatch, "sigma2_cell");
    }
    let variance = |name: &str, v: f64, push: &mut dyn FnMut(ViolationCode, &str)| {
        if !v.is_finite() {
            push(ViolationCode::NonFinite, name);
        } else if v <= 0.0 {
            push(ViolationCode::NegativeVariance, name);
        }
    };
    for (i, v) in state.sigma2_cell.iter().enumerate() {
        if let Some(v) = v {
            variance(&format!("sigma2_cell[{i}]"), *v, &mut push);
        }
    }
    variance("sigma2_eps", state.sigma2_eps, &mut push);
    variance("sigma2_eta0", state.sigma2_eta0, &mut push);
    if state.sigma2_eta_s.len() != q {
        push(ViolationCode::LengthMismatch, "sigma2_eta_s");
    }
    for (k, v) in state.sigma2_eta_s.iter().enumerate() {
        variance(&format!("sigma2_eta_s[{k}]"), *v, &mut push);
    }

    let priors = &spec.priors;
    let correlation = |name: &str, x: f64, b: Bounds, push: &mut dyn FnMut(ViolationCode, &str)| {
        if !x.is_finite() {
            push(ViolationCode::NonFinite, name);
        } else if x == b.lower || x == b.upper {
            push(ViolationCode::CorrelationOnBoundary, name);
        } else if !b.contains_open(x) {
            push(ViolationCode::CorrelationOutOfBounds, name);
        }
    };
    match (spec.variant.is_spatial(), state.rho_eta0) {
        (true, Some(r)) => correlation("rho_eta0", r, priors.rho, &mut push),
        (false, None) => {}
        _ => push(ViolationCode::VariantMismatch, "rho_eta0"),
    }
    correlation("alpha_eta0", state.alpha_eta0, priors.alpha, &mut push);
    if state.rho_eta_s.len() != q {
        push(ViolationCode::LengthMismatch, "rho_eta_s");
    }
    for (k, r) in state.rho_eta_s.iter().enumerate() {
        correlation(&format!("rho_eta_s[{k}]"), *r, priors.rho, &mut push);
    }
    out
}
