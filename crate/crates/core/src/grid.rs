//! Axis-aligned lattices clipped to ℓ_p balls.
//!
//! The lattice is `step·ℤⁿ` in absolute coordinates, whatever the ball's
//! center, so overlapping balls share their grid points exactly. A lattice
//! point is kept when its cube (side `step`) meets the open ball; kept points
//! outside the ball are moved radially onto its surface. Every point of the
//! ball is then within `step/2 · n^(1/p)` of a kept cube's lattice point, and
//! the radial move adds at most that much again.

use crate::space::{LpSpace, Point};

#[derive(Debug, Clone)]
pub(crate) struct BallGrid<'a> {
    space: &'a LpSpace,
    center: &'a Point,
    radius: f64,
    step: f64,
    /// Only the first `active` coordinates vary; the rest stay at the center's values.
    active: usize,
}

impl<'a> BallGrid<'a> {
    pub fn new(space: &'a LpSpace, center: &'a Point, radius: f64, step: f64, active: usize) -> Self {
        debug_assert!(radius > 0.0 && step > 0.0 && active >= 1 && active <= space.dim());
        BallGrid { space, center, radius, step, active }
    }

    /// The (possibly projected) lattice point `j·step`, or `None` when its cube misses the open ball.
    pub fn point(&self, j: &[i64]) -> Option<Point> {
        let c = self.center.coords();
        let lattice: Vec<f64> = j.iter().map(|&ji| ji as f64 * self.step).collect();
        let offset: Vec<f64> = lattice.iter().zip(c).map(|(q, ci)| q - ci).collect();
        let nearest: Vec<f64> = offset.iter().map(|o| (o.abs() - self.step / 2.0).max(0.0)).collect();
        if self.space.len_slice(&nearest) >= self.radius {
            return None;
        }
        let len = self.space.len_slice(&offset);
        let mut coords = c.to_vec();
        if len > self.radius {
            let mut factor = self.radius / len;
            loop {
                for ((x, ci), o) in coords.iter_mut().zip(c).zip(&offset) {
                    *x = ci + o * factor;
                }
                let moved: Vec<f64> = coords.iter().zip(c).map(|(x, ci)| x - ci).collect();
                if self.space.len_slice(&moved) <= self.radius {
                    break;
                }
                factor *= 1.0 - f64::EPSILON;
            }
        } else {
            coords[..self.active].copy_from_slice(&lattice);
        }
        Some(Point::from_vec_unchecked(coords))
    }

    /// Per-axis index range of lattice points whose cube can reach the ball.
    pub fn index_box(&self) -> (Vec<i64>, Vec<i64>) {
        let reach = self.radius + self.step / 2.0;
        let c = &self.center.coords()[..self.active];
        let lo = c.iter().map(|ci| ((ci - reach) / self.step).floor() as i64).collect();
        let hi = c.iter().map(|ci| ((ci + reach) / self.step).ceil() as i64).collect();
        (lo, hi)
    }

    /// All kept points, in index order.
    pub fn points(&self) -> Vec<Point> {
        let (lo, hi) = self.index_box();
        odometer(&lo, &hi).filter_map(|j| self.point(&j)).collect()
    }
}

/// Iterates every integer vector in the box `[lo, hi]`, last axis fastest.
pub(crate) fn odometer(lo: &[i64], hi: &[i64]) -> impl Iterator<Item = Vec<i64>> {
    let lo = lo.to_vec();
    let hi = hi.to_vec();
    let mut cur = if lo.iter().zip(&hi).all(|(l, h)| l <= h) { Some(lo.clone()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut axis = c.len();
        loop {
            if axis == 0 {
                cur = None;
                break;
            }
            axis -= 1;
            if c[axis] < hi[axis] {
                c[axis] += 1;
                break;
            }
            c[axis] = lo[axis];
        }
        Some(out)
    })
}
