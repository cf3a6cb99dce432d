//! Points and the ℓ_p metric on ℝᵐ.
//!
//! Everything else in the crate is written against [`LpSpace`]: distances,
//! norms, and the radial scaling used by the sphere solver.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate vector in the active space. All coordinates are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point must have at least one coordinate".into()));
        }
        Ok(Point(coords))
    }

    /// The origin θ of an `dim`-dimensional space.
    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// The unit coordinate vector e_axis (zero-based axis).
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[axis] = 1.0;
        Point(coords)
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self + factor * dir`
    pub fn add_scaled(&self, dir: &Point, factor: f64) -> Point {
        Point(self.0.iter().zip(&dir.0).map(|(a, d)| a + factor * d).collect())
    }

    /// Lexicographic order on coordinates using `f64::total_cmp`.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// Bitwise equality of every coordinate.
    pub fn bits_eq(&self, other: &Point) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({:?})", self.0)
    }
}

/// ℝᵐ with the ℓ_p norm, 1 ≤ p < ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpSpace {
    dim: usize,
    p: f64,
}

impl LpSpace {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidSpace(format!("exponent p = {p} must lie in [1, inf)")));
        }
        Ok(LpSpace { dim, p })
    }

    pub fn euclidean(dim: usize) -> Self {
        LpSpace { dim, p: 2.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// ℓ_p is strictly convex exactly when p > 1.
    pub fn is_strictly_convex(&self) -> bool {
        self.p > 1.0
    }

    pub fn origin(&self) -> Point {
        Point::zeros(self.dim)
    }

    /// m^(1/p): the ℓ_p length of the all-ones vector, i.e. the ratio between
    /// the ℓ_p circumradius and the half-side of an axis-aligned cube.
    pub fn cube_factor(&self) -> f64 {
        (self.dim as f64).powf(1.0 / self.p)
    }

    pub fn check(&self, a: &Point) -> Result<()> {
        if a.dim() != self.dim {
            return Err(Error::dims(self.dim, a.dim()));
        }
        Ok(())
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.dist(a, b))
    }

    pub fn norm(&self, a: &Point) -> Result<f64> {
        self.check(a)?;
        Ok(self.len(a))
    }

    /// a / ‖a‖
    pub fn scale_to_sphere(&self, a: &Point) -> Result<Point> {
        let n = self.norm(a)?;
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(a.scale(1.0 / n))
    }

    /// Unchecked distance; callers guarantee matching dimensions.
    pub(crate) fn dist(&self, a: &Point, b: &Point) -> f64 {
        debug_assert_eq!(a.dim(), b.dim());
        self.norm_iter(a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()))
    }

    pub(crate) fn len(&self, a: &Point) -> f64 {
        self.norm_iter(a.0.iter().map(|x| x.abs()))
    }

    pub(crate) fn len_slice(&self, a: &[f64]) -> f64 {
        self.norm_iter(a.iter().map(|x| x.abs()))
    }

    fn norm_iter<I>(&self, abs: I) -> f64
    where
        I: Iterator<Item = f64> + Clone,
    {
        let p = self.p;
        if p == 1.0 {
            return abs.sum();
        }
        if p == 2.0 {
            return abs.fold(0.0, f64::hypot);
        }
        // scale by the largest component so the power sum neither overflows nor underflows
        let big = abs.clone().fold(0.0_f64, f64::max);
        if big == 0.0 {
            return 0.0;
        }
        let sum: f64 = abs.map(|x| (x / big).powf(p)).sum();
        big * sum.powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let l2 = LpSpace::new(2, 2.0).unwrap();
        let l1 = LpSpace::new(2, 1.0).unwrap();
        assert_eq!(l2.distance(&pt(&[0.0, 0.0]), &pt(&[0.0, 0.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(
            l2.distance(&pt(&[1.0, 1.0]), &pt(&[0.0, 0.0])).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(l1.distance(&pt(&[1.0, 1.0]), &pt(&[0.0, 0.0])).unwrap(), 2.0);
    }

    #[test]
    fn norm_examples() {
        let l2 = LpSpace::euclidean(2);
        let l1 = LpSpace::new(2, 1.0).unwrap();
        let l37 = LpSpace::new(2, 3.7).unwrap();
        assert_eq!(l37.norm(&l37.origin()).unwrap(), 0.0);
        assert_abs_diff_eq!(l2.norm(&pt(&[3.0, 4.0])).unwrap(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l1.norm(&pt(&[3.0, 4.0])).unwrap(), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn general_p_matches_power_sum() {
        let sp = LpSpace::new(3, 5.6789).unwrap();
        let a = pt(&[0.3, -1.2, 2.5]);
        let direct: f64 = a.coords().iter().map(|x| x.abs().powf(5.6789)).sum::<f64>().powf(1.0 / 5.6789);
        assert_abs_diff_eq!(sp.norm(&a).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn scale_to_sphere_examples() {
        let l2 = LpSpace::euclidean(2);
        let l1 = LpSpace::new(2, 1.0).unwrap();
        assert_eq!(l2.scale_to_sphere(&pt(&[2.0, 0.0])).unwrap(), pt(&[1.0, 0.0]));
        let u = l2.scale_to_sphere(&pt(&[3.0, 4.0])).unwrap();
        assert_abs_diff_eq!(u.coords()[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(u.coords()[1], 0.8, epsilon = 1e-12);
        let v = l1.scale_to_sphere(&pt(&[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(v.coords()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v.coords()[1], 0.5, epsilon = 1e-12);
        assert_eq!(l2.scale_to_sphere(&l2.origin()), Err(Error::ZeroVector));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(LpSpace::new(2, 0.5).is_err());
        assert!(LpSpace::new(0, 2.0).is_err());
        assert!(LpSpace::new(2, f64::INFINITY).is_err());
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        let l2 = LpSpace::euclidean(2);
        assert_eq!(
            l2.distance(&pt(&[0.0]), &pt(&[0.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        );
        assert!(l2.is_strictly_convex());
        assert!(!LpSpace::new(2, 1.0).unwrap().is_strictly_convex());
    }

    fn triple(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let c = || proptest::collection::vec(-50.0..50.0f64, dim);
        (c(), c(), c())
    }

    proptest! {
        #[test]
        fn metric_axioms(p in prop_oneof![Just(1.0), Just(2.0), Just(3.5), Just(5.6789), 1.0..8.0f64],
                         (a, b, c) in triple(3)) {
            let sp = LpSpace::new(3, p).unwrap();
            let (a, b, c) = (pt(&a), pt(&b), pt(&c));
            let ab = sp.distance(&a, &b).unwrap();
            let ba = sp.distance(&b, &a).unwrap();
            let bc = sp.distance(&b, &c).unwrap();
            let ac = sp.distance(&a, &c).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!(sp.distance(&a, &a).unwrap() <= 1e-12);
            prop_assert!(ac <= ab + bc + 1e-12);
            // second triangle inequality
            prop_assert!((ac - bc).abs() <= ab + 1e-12);
        }

        #[test]
        fn norm_is_homogeneous(p in 1.0..8.0f64, a in proptest::collection::vec(-10.0..10.0f64, 2), t in -5.0..5.0f64) {
            let sp = LpSpace::new(2, p).unwrap();
            let a = pt(&a);
            let lhs = sp.norm(&a.scale(t)).unwrap();
            let rhs = t.abs() * sp.norm(&a).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn strict_convexity_midpoint(p in 1.05..8.0f64, x in proptest::collection::vec(-1.0..1.0f64, 2),
                                     y in proptest::collection::vec(-1.0..1.0f64, 2)) {
            let sp = LpSpace::new(2, p).unwrap();
            let (x, y) = (pt(&x), pt(&y));
            prop_assume!(sp.norm(&x).unwrap() > 1e-3 && sp.norm(&y).unwrap() > 1e-3);
            let ux = sp.scale_to_sphere(&x).unwrap();
            let uy = sp.scale_to_sphere(&y).unwrap();
            prop_assume!(sp.distance(&ux, &uy).unwrap() > 1e-3);
            let mid = ux.add(&uy).scale(0.5);
            prop_assert!(sp.norm(&mid).unwrap() < 1.0);
        }
    }
}
