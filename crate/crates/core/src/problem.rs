//! Sound-ranging instances: backward moments, the two defects, and the
//! ball inclusion/exclusion tests built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{LpSpace, Point};

/// Slack added to `2r` in [`SrpInstance::ball_test`] so rounding never
/// discards the ball that holds the source.
pub const BALL_TEST_SLACK: f64 = 1e-12;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    /// Range of the backward moments, max τ − min τ.
    #[default]
    Sup,
    /// Weighted mean absolute deviation of the backward moments.
    Sum,
}

/// Anything that assigns a nonnegative, 2-Lipschitz defect to the points of a space.
///
/// The refining-cover engine only needs this; [`SrpInstance`] is the usual
/// implementor, the ray reduction of the sphere solver is another.
pub trait DefectField: Sync {
    fn space(&self) -> &LpSpace;

    /// Defect at `x`. Callers guarantee `x` has the space's dimension.
    fn defect_at(&self, x: &Point) -> f64;
}

impl<T: DefectField + ?Sized> DefectField for &T {
    fn space(&self) -> &LpSpace {
        (**self).space()
    }

    fn defect_at(&self, x: &Point) -> f64 {
        (**self).defect_at(x)
    }
}

/// Source position and emission moment that generated an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub source: Point,
    pub emit_time: f64,
}

impl GroundTruth {
    pub fn new(source: Point, emit_time: f64) -> Self {
        GroundTruth { source, emit_time }
    }

    /// Arrival moments t_i = t₀ + ρ(r_i, s).
    pub fn arrival_times(&self, space: &LpSpace, sensors: &[Point]) -> Result<Vec<f64>> {
        sensors
            .iter()
            .map(|r| Ok(self.emit_time + space.distance(r, &self.source)?))
            .collect()
    }
}

/// A sound-ranging problem: sensors, their arrival moments, and the defect in use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrpInstance {
    space: LpSpace,
    sensors: Vec<Point>,
    times: Vec<f64>,
    weights: Vec<f64>,
    defect_kind: DefectKind,
}

impl SrpInstance {
    /// Builds an instance with uniform weights 1/n and the sup defect.
    pub fn new(space: LpSpace, sensors: Vec<Point>, times: Vec<f64>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::InvalidInstance("sensor list is empty".into()));
        }
        if times.len() != sensors.len() {
            return Err(Error::InvalidInstance(format!(
                "{} sensors but {} arrival times",
                sensors.len(),
                times.len()
            )));
        }
        for r in &sensors {
            space.check(r)?;
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidInstance(format!("arrival time {i} is not finite")));
        }
        let n = sensors.len();
        Ok(SrpInstance {
            space,
            sensors,
            times,
            weights: vec![1.0 / n as f64; n],
            defect_kind: DefectKind::Sup,
        })
    }

    pub fn from_ground_truth(space: LpSpace, sensors: Vec<Point>, truth: &GroundTruth) -> Result<Self> {
        space.check(&truth.source)?;
        let times = truth.arrival_times(&space, &sensors)?;
        Self::new(space, sensors, times)
    }

    /// Replaces the weights used by the sum defect. They must be positive and sum to 1.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.sensors.len() {
            return Err(Error::InvalidInstance(format!(
                "{} sensors but {} weights",
                self.sensors.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInstance("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInstance(format!("weights sum to {total}, not 1")));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_defect_kind(mut self, kind: DefectKind) -> Self {
        self.defect_kind = kind;
        self
    }

    pub fn space(&self) -> &LpSpace {
        &self.space
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn defect_kind(&self) -> DefectKind {
        self.defect_kind
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// τ_i(x) = t_i − ρ(x, r_i)
    pub fn backward_moment(&self, i: usize, x: &Point) -> Result<f64> {
        let len = self.sensors.len();
        let r = self.sensors.get(i).ok_or(Error::IndexOutOfRange { index: i, len })?;
        self.space.check(x)?;
        Ok(self.times[i] - self.space.dist(x, r))
    }

    fn moments<'a>(&'a self, x: &'a Point) -> impl Iterator<Item = f64> + 'a {
        self.sensors
            .iter()
            .zip(&self.times)
            .map(move |(r, t)| t - self.space.dist(x, r))
    }

    pub fn defect_sup(&self, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.sup_unchecked(x))
    }

    pub fn defect_sum(&self, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.sum_unchecked(x))
    }

    /// The defect selected by [`SrpInstance::defect_kind`].
    pub fn defect(&self, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.defect_unchecked(x))
    }

    fn sup_unchecked(&self, x: &Point) -> f64 {
        let (lo, hi) = self
            .moments(x)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
        hi - lo
    }

    fn sum_unchecked(&self, x: &Point) -> f64 {
        let taus: Vec<f64> = self.moments(x).collect();
        let mean: f64 = taus.iter().zip(&self.weights).map(|(t, p)| p * t).sum();
        taus.iter().zip(&self.weights).map(|(t, p)| p * (t - mean).abs()).sum()
    }

    fn defect_unchecked(&self, x: &Point) -> f64 {
        match self.defect_kind {
            DefectKind::Sup => self.sup_unchecked(x),
            DefectKind::Sum => self.sum_unchecked(x),
        }
    }

    /// `true` keeps B[c; r] as suspicious; `false` certifies the source is not in it.
    pub fn ball_test(&self, c: &Point, r: f64) -> Result<bool> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius {r} must be positive")));
        }
        Ok(self.defect(c)? <= 2.0 * r + BALL_TEST_SLACK)
    }

    /// Certifies that the source is not in B[y; r] using a witness x inside that ball
    /// whose defect exceeds 4r.
    pub fn exclusion_by_witness(&self, x: &Point, y: &Point, r: f64) -> Result<bool> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius {r} must be positive")));
        }
        let gap = self.space.distance(x, y)?;
        if gap > r {
            return Err(Error::Precondition(format!(
                "witness lies at distance {gap} > r = {r} from the ball center"
            )));
        }
        let d = self.defect_unchecked(x);
        Ok(d > 0.0 && r < d / 4.0)
    }

    pub fn is_solution(&self, x: &Point, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be nonnegative")));
        }
        Ok(self.defect(x)? <= tol)
    }
}

impl DefectField for SrpInstance {
    fn space(&self) -> &LpSpace {
        &self.space
    }

    fn defect_at(&self, x: &Point) -> f64 {
        self.defect_unchecked(x)
    }
}

/// Weights 2^{-i}, i = 1..n, renormalized to sum to one.
pub fn geometric_weights(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|i| 0.5f64.powi(i as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
