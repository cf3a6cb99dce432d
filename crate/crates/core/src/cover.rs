//! Coverands and their half-size subdivision.
//!
//! Two covershapes are realized: closed ℓ_p balls in ℝᵐ, and closed
//! segments on a ray `origin + (1 + u)·direction`. Both satisfy the
//! half-cover property: every coverand of size r is covered by finitely
//! many coverands of size r/2 anchored inside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::BallGrid;
use crate::space::{LpSpace, Point};

const RAY_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    LpBall,
    RaySegment(RaySegment),
}

/// Points `origin + (1 + u)·direction` with `u ∈ [lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySegment {
    pub origin: Point,
    pub direction: Point,
    pub lo: f64,
    pub hi: f64,
}

impl RaySegment {
    pub fn at(&self, u: f64) -> Point {
        self.origin.add_scaled(&self.direction, 1.0 + u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverand {
    space: LpSpace,
    anchor: Point,
    size: f64,
    shape: Shape,
}

impl Coverand {
    /// The closed ball B[anchor; size].
    pub fn ball(space: LpSpace, anchor: Point, size: f64) -> Result<Self> {
        space.check(&anchor)?;
        check_size(size)?;
        Ok(Coverand { space, anchor, size, shape: Shape::LpBall })
    }

    /// The ray segment over `u ∈ [lo, hi]`, anchored at its midpoint with size (hi − lo)/2.
    pub fn ray_segment(space: LpSpace, origin: Point, direction: Point, lo: f64, hi: f64) -> Result<Self> {
        space.check(&origin)?;
        let len = space.norm(&direction)?;
        if (len - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!("ray direction has norm {len}, expected 1")));
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument("segment bounds must be finite".into()));
        }
        check_size((hi - lo) / 2.0)?;
        let seg = RaySegment { origin, direction, lo, hi };
        let anchor = seg.at((lo + hi) / 2.0);
        Ok(Coverand { space, anchor, size: (hi - lo) / 2.0, shape: Shape::RaySegment(seg) })
    }

    pub fn space(&self) -> &LpSpace {
        &self.space
    }

    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Upper bound on the number of children an ℓ_p ball can produce.
    pub fn max_ball_children(space: &LpSpace) -> usize {
        let per_axis = (4.0 * space.cube_factor()).ceil() as usize + 1;
        per_axis.saturating_pow(space.dim() as u32)
    }

    /// Finitely many coverands of half the size, anchored in this one, whose union covers it.
    ///
    /// Children come out in lexicographic anchor order.
    pub fn subdivide(&self) -> Result<Vec<Coverand>> {
        check_size(self.size)?;
        let half = self.size / 2.0;
        let mut children = match &self.shape {
            Shape::LpBall => {
                let step = half / self.space.cube_factor();
                let grid = BallGrid::new(&self.space, &self.anchor, self.size, step, self.space.dim());
                let kids: Vec<Coverand> = grid
                    .points()
                    .into_iter()
                    .map(|anchor| Coverand { space: self.space, anchor, size: half, shape: Shape::LpBall })
                    .collect();
                debug_assert!(kids.len() <= Self::max_ball_children(&self.space));
                kids
            }
            Shape::RaySegment(seg) => {
                let mid = (seg.lo + seg.hi) / 2.0;
                [(seg.lo, mid), (mid, seg.hi)]
                    .into_iter()
                    .map(|(lo, hi)| {
                        let s = RaySegment { lo, hi, ..seg.clone() };
                        Coverand { space: self.space, anchor: s.at((lo + hi) / 2.0), size: half, shape: Shape::RaySegment(s) }
                    })
                    .collect()
            }
        };
        children.sort_by(|a, b| a.anchor.lex_cmp(&b.anchor));
        Ok(children)
    }

    /// Membership in the realized set.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.space.check(x)?;
        Ok(match &self.shape {
            Shape::LpBall => self.space.dist(x, &self.anchor) <= self.size,
            Shape::RaySegment(seg) => {
                let rel = x.sub(&seg.origin);
                let dd: f64 = seg.direction.coords().iter().map(|d| d * d).sum();
                let t = rel.coords().iter().zip(seg.direction.coords()).map(|(a, d)| a * d).sum::<f64>() / dd;
                let residual = self.space.dist(&rel, &seg.direction.scale(t));
                let u = t - 1.0;
                residual <= RAY_TOL && u >= seg.lo - RAY_TOL && u <= seg.hi + RAY_TOL
            }
        })
    }
}

fn check_size(size: f64) -> Result<()> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidArgument(format!("coverand size {size} must be positive")));
    }
    Ok(())
}

/// The surviving coverands at one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverFamily {
    pub level: u32,
    pub radius: f64,
    pub members: Vec<Coverand>,
}

impl CoverFamily {
    pub fn new(level: u32, radius: f64, members: Vec<Coverand>) -> Self {
        CoverFamily { level, radius, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// r_k + max over member anchors c' of ρ(pivot, c').
    pub fn spread(&self, pivot: &Point) -> Result<f64> {
        if self.members.is_empty() {
            return Err(Error::InvalidArgument("spread of an empty family".into()));
        }
        if !self.members.iter().any(|m| m.anchor.bits_eq(pivot)) {
            return Err(Error::Precondition("pivot is not the anchor of a family member".into()));
        }
        Ok(self.spread_unchecked(pivot))
    }

    pub(crate) fn spread_unchecked(&self, pivot: &Point) -> f64 {
        let space = self.members[0].space;
        let far = self.members.iter().map(|m| space.dist(pivot, &m.anchor)).fold(0.0, f64::max);
        self.radius + far
    }
}
