//! Shared domain types: coupling strengths, target spacings, agent states and
//! the scenario bundle that drives a simulation.
//!
//! Agent indices are 0-based throughout the library. Phases are kept on the
//! real line and never wrapped to the circle.

use serde::{Deserialize, Serialize};

use crate::cucker_smale::CommWeight;
use crate::error::{Error, Result};

/// Coupling strengths shared by both models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Alignment (Kuramoto or Cucker-Smale) strength.
    pub kappa0: f64,
    /// Bonding strength acting on relative velocities.
    pub kappa1: f64,
    /// Bonding strength acting on relative positions.
    pub kappa2: f64,
}

impl ModelParams {
    pub fn new(kappa0: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        let p = ModelParams {
            kappa0,
            kappa1,
            kappa2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("kappa0", self.kappa0),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeCoupling { name, value });
            }
        }
        Ok(())
    }
}

/// Dense symmetric matrix of desired pairwise spacings.
///
/// Units are radians for the Kuramoto model and length for Cucker-Smale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TargetMatrix {
    /// Builds a matrix from row-major entries and checks every invariant.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        let m = Self::new_unchecked(n, entries)?;
        m.validate()?;
        Ok(m)
    }

    /// Builds a matrix checking only the shape. Use [`TargetMatrix::validate`]
    /// before handing it to the models.
    pub fn new_unchecked(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "target matrix of order {n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(TargetMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "target matrix must be square".into(),
            ));
        }
        Self::new(n, rows.concat())
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("target matrix"));
        }
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(Error::NonzeroTargetDiagonal(i));
            }
            for j in (i + 1)..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::AsymmetricTarget(i, j));
                }
                if self.get(i, j) <= 0.0 {
                    return Err(Error::NonpositiveTarget(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| self.get(i, j)))
    }

    /// Smallest off-diagonal entry; `+inf` for a single agent.
    pub fn min_off_diagonal(&self) -> f64 {
        self.off_diagonal().fold(f64::INFINITY, f64::min)
    }

    /// Largest off-diagonal entry; `-inf` for a single agent.
    pub fn max_off_diagonal(&self) -> f64 {
        self.off_diagonal().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Spacings `|θ*_i - θ*_j|` of a reference phase layout (radians).
pub fn target_from_phases(theta_star: &[f64]) -> Result<TargetMatrix> {
    let n = theta_star.len();
    if n < 2 {
        return Err(Error::TooFewAgents { needed: 2, got: n });
    }
    if theta_star.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("target phases"));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (theta_star[i] - theta_star[j]).abs();
            if d == 0.0 {
                return Err(Error::DuplicateTarget(i, j));
            }
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    TargetMatrix::new(n, entries)
}

/// Euclidean spacings of a reference point layout given as `n` rows of `dim`
/// coordinates.
pub fn target_from_points(points: &[Vec<f64>]) -> Result<TargetMatrix> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewAgents { needed: 2, got: n });
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch(
            "target points need a common positive dimension".into(),
        ));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("target points"));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclid(&points[i], &points[j]);
            if d == 0.0 {
                return Err(Error::DuplicateTarget(i, j));
            }
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    TargetMatrix::new(n, entries)
}

#[inline]
pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Phases and frequencies of `n` oscillators at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuramotoState {
    pub t: f64,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

impl KuramotoState {
    pub fn new(t: f64, theta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        let s = KuramotoState { t, theta, omega };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::TooFewAgents { needed: 1, got: 0 });
        }
        if self.theta.len() != self.omega.len() {
            return Err(Error::DimensionMismatch(format!(
                "theta has {} entries but omega has {}",
                self.theta.len(),
                self.omega.len()
            )));
        }
        if !self.t.is_finite() || self.theta.iter().chain(&self.omega).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Kuramoto state"));
        }
        Ok(())
    }
}

/// Positions and velocities of `n` particles in `dim` dimensions, stored as
/// row-major `n × dim` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsState {
    pub t: f64,
    pub dim: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl CsState {
    pub fn new(t: f64, dim: usize, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let s = CsState { t, dim, x, v };
        s.validate()?;
        Ok(s)
    }

    pub fn from_rows(t: f64, x: &[Vec<f64>], v: &[Vec<f64>]) -> Result<Self> {
        let dim = x.first().map_or(0, Vec::len);
        if x.iter().chain(v).any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(
                "position and velocity rows must share one dimension".into(),
            ));
        }
        Self::new(t, dim, x.concat(), v.concat())
    }

    pub fn n(&self) -> usize {
        self.x.len().checked_div(self.dim).unwrap_or(0)
    }

    #[inline]
    pub fn pos(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn vel(&self, i: usize) -> &[f64] {
        &self.v[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclid(self.pos(i), self.pos(j))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::DimensionMismatch(
                "dimension must be at least 1".into(),
            ));
        }
        if self.x.is_empty() {
            return Err(Error::TooFewAgents { needed: 1, got: 0 });
        }
        if !self.x.len().is_multiple_of(self.dim) || self.x.len() != self.v.len() {
            return Err(Error::DimensionMismatch(format!(
                "positions ({}) and velocities ({}) do not form matching n x {} blocks",
                self.x.len(),
                self.v.len(),
                self.dim
            )));
        }
        if !self.t.is_finite() || self.x.iter().chain(&self.v).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("Cucker-Smale state"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    KuramotoBond,
    KuramotoFirstOrder,
    CsBond,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::KuramotoBond => "kuramoto-bond",
            ModelKind::KuramotoFirstOrder => "kuramoto-first-order",
            ModelKind::CsBond => "cs-bond",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "kuramoto-bond" => Some(ModelKind::KuramotoBond),
            "kuramoto-first-order" => Some(ModelKind::KuramotoFirstOrder),
            "cs-bond" => Some(ModelKind::CsBond),
            _ => None,
        }
    }

    pub fn is_kuramoto(self) -> bool {
        !matches!(self, ModelKind::CsBond)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    Kuramoto(KuramotoState),
    Cs(CsState),
}

impl InitialState {
    pub fn n(&self) -> usize {
        match self {
            InitialState::Kuramoto(s) => s.n(),
            InitialState::Cs(s) => s.n(),
        }
    }
}

/// Default absolute floor for the pairwise-gap monitor.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-6;

/// Everything needed for one simulation run.
///
/// For the first-order Kuramoto model `initial.omega` holds the instantaneous
/// frequencies `θ̇(0)` implied by `nu`; they are recomputed at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model: ModelKind,
    pub params: ModelParams,
    pub nu: Option<Vec<f64>>,
    pub target: TargetMatrix,
    pub initial: InitialState,
    pub weight: CommWeight,
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `stride`-th grid point in the output.
    pub stride: usize,
    /// `None` disables the gap monitor.
    pub gap_floor: Option<f64>,
}

/// Checks every type invariant plus cross-field consistency.
pub fn validate_scenario(s: &Scenario) -> Result<()> {
    s.params.validate()?;
    if !(s.dt.is_finite() && s.dt > 0.0) {
        return Err(Error::InvalidStep(s.dt));
    }
    if !(s.t_end.is_finite() && s.t_end > 0.0) {
        return Err(Error::InvalidHorizon(s.t_end));
    }
    if s.stride == 0 {
        return Err(Error::InvalidStride);
    }
    if let Some(floor) = s.gap_floor {
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::InvalidGapFloor(floor));
        }
    }
    s.target.validate()?;
    s.weight.validate()?;

    let n = s.initial.n();
    match (&s.initial, s.model.is_kuramoto()) {
        (InitialState::Kuramoto(k), true) => k.validate()?,
        (InitialState::Cs(c), false) => c.validate()?,
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "initial state does not match model {}",
                s.model.tag()
            )))
        }
    }
    if n < 2 {
        return Err(Error::TooFewAgents { needed: 2, got: n });
    }
    if s.target.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "target matrix has order {} but there are {n} agents",
            s.target.n()
        )));
    }
    match (&s.nu, s.model) {
        (None, ModelKind::KuramotoFirstOrder) => return Err(Error::MissingNaturalFrequencies),
        (Some(nu), _) => {
            if nu.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "nu has {} entries but there are {n} agents",
                    nu.len()
                )));
            }
            if nu.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("nu"));
            }
        }
        _ => {}
    }
    Ok(())
}
