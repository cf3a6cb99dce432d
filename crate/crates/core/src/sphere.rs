//! Dense sensors on the unit sphere of a strictly convex ℓ_p space.
//!
//! The sensor set is the whole sphere S[θ; 1], represented by an arrival-time
//! oracle `r ↦ t_r`. The best and worst approximants b, w of the source are
//! the minimizer and maximizer of `t_r`; their spread `t_w − t_b` tells a
//! source inside the unit ball (`2‖s‖ < 2`, closed form `s = ½(t_w − t_b)·b`)
//! from one outside it (spread exactly 2), where the source is found by a
//! refining cover along the ray `{d·b : d ≥ 1}` using a third sensor.

use serde::{Deserialize, Serialize};

use crate::cover::Coverand;
use crate::error::{Error, Result};
use crate::problem::DefectField;
use crate::rc::{solve_field, LevelRecord, RcConfig, SolveReport};
use crate::rng::SplitMix;
use crate::space::{LpSpace, Point};

/// Default tolerance on `t_w − t_b` versus 2.
pub const CLASSIFY_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 720;

const ANGLE_TOL: f64 = 1e-10;
const MAX_CYCLES: usize = 200;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Arrival times generated by a known source on the unit sphere sensor set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSphereArrivals {
    pub space: LpSpace,
    pub source: Point,
    pub emit_time: f64,
}

impl UnitSphereArrivals {
    pub fn new(space: LpSpace, source: Point, emit_time: f64) -> Result<Self> {
        space.check(&source)?;
        Ok(UnitSphereArrivals { space, source, emit_time })
    }

    /// t_r = t₀ + ‖r − s‖
    pub fn arrival(&self, r: &Point) -> f64 {
        self.emit_time + self.space.dist(r, &self.source)
    }
}

/// Best and worst approximants of the source on the unit sphere with their arrival times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalArrival {
    pub t_b: f64,
    pub b: Point,
    pub t_w: f64,
    pub w: Point,
}

impl SphericalArrival {
    pub fn spread(&self) -> f64 {
        self.t_w - self.t_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// ‖s‖ < 1
    Inside,
    /// ‖s‖ ≥ 1
    Outside,
}

fn require_sphere_space(space: &LpSpace) -> Result<()> {
    if !space.is_strictly_convex() {
        return Err(Error::NotStrictlyConvex { p: space.p() });
    }
    if space.dim() < 2 {
        return Err(Error::InvalidSpace("the sphere method needs dimension at least 2".into()));
    }
    Ok(())
}

/// Deterministic, roughly uniform Euclidean-unit directions.
fn sample_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci lattice
            let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden_angle * i as f64;
                    vec![rho * a.cos(), rho * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = SplitMix::new(0x5EED_5FE3);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let n = euclid(&v);
                if n > 1e-3 && n <= 1.0 {
                    out.push(v.iter().map(|x| x / n).collect());
                }
            }
            out
        }
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Typical angular gap between neighbouring sample directions.
fn sample_spacing(dim: usize, count: usize) -> f64 {
    let c = count as f64;
    match dim {
        2 => std::f64::consts::TAU / c,
        _ => (4.0 * std::f64::consts::PI / c).powf(1.0 / (dim as f64 - 1.0)),
    }
}

fn to_sphere(space: &LpSpace, v: &[f64]) -> Point {
    let n = space.len_slice(v);
    Point::from_vec_unchecked(v.iter().map(|x| x / n).collect())
}

/// Orthonormal basis of the Euclidean complement of the unit vector `v`.
fn tangent_basis(v: &[f64]) -> Vec<Vec<f64>> {
    let dim = v.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()));
    for &axis in &order {
        if basis.len() == dim - 1 {
            break;
        }
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        for q in std::iter::once(v).chain(basis.iter().map(|b| b.as_slice())) {
            let dot: f64 = e.iter().zip(q).map(|(a, b)| a * b).sum();
            e.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let n = euclid(&e);
        if n > 1e-8 {
            basis.push(e.iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Golden-section minimization of `f` on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Minimizes `f` over unit directions: coarse sampling, then cyclic
/// golden-section searches along tangent axes around the current best.
fn minimize_on_sphere(space: &LpSpace, f: &dyn Fn(&Point) -> f64, samples: usize) -> Point {
    let dim = space.dim();
    let dirs = sample_directions(dim, samples.max(8));
    let mut best = dirs
        .iter()
        .min_by(|a, b| f(&to_sphere(space, a)).total_cmp(&f(&to_sphere(space, b))))
        .cloned()
        .expect("at least one sample");
    let mut reach = 1.5 * sample_spacing(dim, samples.max(8));
    for _ in 0..MAX_CYCLES {
        let basis = tangent_basis(&best);
        let mut offset = vec![0.0; dim - 1];
        let mut at_edge = false;
        for axis in 0..dim - 1 {
            let probe = |a: f64| {
                let mut v = best.clone();
                for (k, e) in basis.iter().enumerate() {
                    let t = if k == axis { a } else { offset[k] };
                    v.iter_mut().zip(e).for_each(|(x, ei)| *x += t * ei);
                }
                f(&to_sphere(space, &v))
            };
            let a = golden_min(probe, -reach, reach, ANGLE_TOL.min(reach * 1e-3));
            at_edge |= a.abs() > 0.95 * reach;
            offset[axis] = a;
        }
        let mut v = best.clone();
        for (t, e) in offset.iter().zip(&basis) {
            v.iter_mut().zip(e).for_each(|(x, ei)| *x += t * ei);
        }
        let n = euclid(&v);
        best = v.iter().map(|x| x / n).collect();
        let moved = euclid(&offset);
        if at_edge {
            reach *= 2.0;
            continue;
        }
        if moved < ANGLE_TOL {
            break;
        }
        reach = (4.0 * moved).clamp(1e-7, reach);
    }
    to_sphere(space, &best)
}

/// Locates the minimizer b and maximizer w of the arrival oracle on the unit sphere.
pub fn find_extremes<F>(space: &LpSpace, oracle: F, m_samples: usize) -> Result<SphericalArrival>
where
    F: Fn(&Point) -> f64,
{
    require_sphere_space(space)?;
    let mut b = minimize_on_sphere(space, &|r| oracle(r), m_samples);
    let mut w = minimize_on_sphere(space, &|r| -oracle(r), m_samples);
    let (mut t_b, mut t_w) = (oracle(&b), oracle(&w));
    if let Some(fit) = fit_best(space, &oracle, &b, t_b, t_w) {
        let t_fit = oracle(&fit);
        if t_fit <= t_b + VALUE_SLACK {
            b = fit;
            t_b = t_fit;
        }
    }
    let anti = b.scale(-1.0);
    let t_anti = oracle(&anti);
    if t_anti >= t_w - VALUE_SLACK {
        w = anti;
        t_w = t_anti;
    }
    Ok(SphericalArrival { t_b, b, t_w, w })
}

const VALUE_SLACK: f64 = 1e-12;

/// Sharpens the minimizer where t_r is too flat for value search (p > 2 near the axes).
///
/// With ‖s‖ and t₀ pinned by the extreme values (inside), or t₀ + ‖s‖ pinned
/// by t_b (outside), the arrival times at a few more unit sensors give ranges
/// to s; a damped Gauss–Newton fit of s from these returns s/‖s‖.
fn fit_best<F: Fn(&Point) -> f64>(space: &LpSpace, oracle: &F, b0: &Point, t_b: f64, t_w: f64) -> Option<Point> {
    use nalgebra::{DMatrix, DVector};

    let dim = space.dim();
    let p = space.p();
    let spread = t_w - t_b;
    let outside = spread >= 2.0 - CLASSIFY_TOL;
    if !outside && spread / 2.0 < 1e-9 {
        return None;
    }
    let t0 = (t_b + t_w) / 2.0 - 1.0;
    let mut probes: Vec<Point> = (0..dim).flat_map(|i| [Point::basis(dim, i), Point::basis(dim, i).scale(-1.0)]).collect();
    probes.extend(sample_directions(dim, 4 * dim).iter().map(|v| to_sphere(space, v)));
    let times: Vec<f64> = probes.iter().map(oracle).collect();

    // d/dx ‖x‖_p = sign(x)|x|^(p−1) / ‖x‖^(p−1)
    let grad = |v: &[f64], n: f64| -> Vec<f64> { v.iter().map(|x| x.signum() * (x.abs() / n).powf(p - 1.0)).collect() };
    let eval = |s: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let mut res = DVector::zeros(probes.len());
        let mut jac = DMatrix::zeros(probes.len(), dim);
        let sn = space.len_slice(s);
        let gs = grad(s, sn);
        for (j, (r, t)) in probes.iter().zip(&times).enumerate() {
            let diff: Vec<f64> = s.iter().zip(r.coords()).map(|(a, b)| a - b).collect();
            let dn = space.len_slice(&diff);
            let gd = if dn > 0.0 { grad(&diff, dn) } else { vec![0.0; dim] };
            res[j] = if outside { dn - sn - (t - t_b - 1.0) } else { dn - (t - t0) };
            for i in 0..dim {
                jac[(j, i)] = if outside { gd[i] - gs[i] } else { gd[i] };
            }
        }
        (res, jac)
    };

    let scale = if outside { 2.0 } else { spread / 2.0 };
    let mut s: Vec<f64> = b0.coords().iter().map(|x| x * scale).collect();
    let (mut res, mut jac) = eval(&s);
    let mut cost = res.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let jt = jac.transpose();
        let mut normal = &jt * &jac;
        for i in 0..dim {
            normal[(i, i)] *= 1.0 + lambda;
        }
        let step = normal.lu().solve(&(-(&jt * &res)))?;
        let trial: Vec<f64> = s.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
        let (tres, tjac) = eval(&trial);
        let tcost = tres.norm_squared();
        if tcost < cost {
            s = trial;
            res = tres;
            jac = tjac;
            cost = tcost;
            lambda = (lambda / 10.0).max(1e-12);
            if step.norm() < 1e-15 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    let sn = space.len_slice(&s);
    (sn > 0.0 && sn.is_finite()).then(|| Point::from_vec_unchecked(s.iter().map(|x| x / sn).collect()))
}

/// Inside/outside the unit ball from the spread `t_w − t_b`.
pub fn classify(arr: &SphericalArrival, tol: f64) -> Result<Region> {
    let spread = arr.spread();
    if spread > 2.0 + tol {
        return Err(Error::InconsistentArrivals { spread, tol });
    }
    Ok(if (spread - 2.0).abs() <= tol { Region::Outside } else { Region::Inside })
}

/// s = ½(t_w − t_b)·b for a source inside the unit ball.
pub fn recover_inside(arr: &SphericalArrival) -> Result<Point> {
    if classify(arr, CLASSIFY_TOL)? != Region::Inside {
        return Err(Error::Precondition("source is not inside the unit ball".into()));
    }
    Ok(arr.b.scale(arr.spread() / 2.0))
}

/// The source restricted to the ray `{d·b : d ≥ 1}`, seen by b, w and one more sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayProblem {
    space: LpSpace,
    direction: Point,
    third_sensor: Point,
    t_b: f64,
    t_w: f64,
    t_r: f64,
    /// ‖s‖ ≤ bound + 1
    bound: f64,
}

impl RayProblem {
    pub fn new(
        space: LpSpace,
        direction: Point,
        third_sensor: Point,
        (t_b, t_w, t_r): (f64, f64, f64),
        bound: f64,
    ) -> Result<Self> {
        require_sphere_space(&space)?;
        for (name, v) in [("direction", &direction), ("third sensor", &third_sensor)] {
            let n = space.norm(v)?;
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("{name} has norm {n}, expected 1")));
            }
        }
        let gap = space
            .dist(&third_sensor, &direction)
            .min(space.dist(&third_sensor, &direction.scale(-1.0)));
        if gap <= 1e-6 {
            return Err(Error::InvalidArgument("third sensor coincides with ±direction".into()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("norm bound {bound} must be positive")));
        }
        Ok(RayProblem { space, direction, third_sensor, t_b, t_w, t_r, bound })
    }

    /// Builds the ray problem from the extremes, picking the sampled unit vector
    /// farthest from both ±b as the third sensor and querying its arrival time.
    pub fn from_arrivals<F>(space: &LpSpace, arr: &SphericalArrival, oracle: F, m_samples: usize, bound: f64) -> Result<Self>
    where
        F: Fn(&Point) -> f64,
    {
        require_sphere_space(space)?;
        let neg_b = arr.b.scale(-1.0);
        let third = sample_directions(space.dim(), m_samples.max(8))
            .iter()
            .map(|v| to_sphere(space, v))
            .max_by(|x, y| {
                let gx = space.dist(x, &arr.b).min(space.dist(x, &neg_b));
                let gy = space.dist(y, &arr.b).min(space.dist(y, &neg_b));
                gx.total_cmp(&gy)
            })
            .expect("at least one sample");
        let t_r = oracle(&third);
        RayProblem::new(*space, arr.b.clone(), third, (arr.t_b, arr.t_w, t_r), bound)
    }

    pub fn direction(&self) -> &Point {
        &self.direction
    }

    pub fn third_sensor(&self) -> &Point {
        &self.third_sensor
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// |t_r − t_b − ‖d·b − r‖ + d − 1| at the ray point x = d·b.
    pub fn ray_defect(&self, d: f64) -> Result<f64> {
        if !(d >= 1.0) {
            return Err(Error::InvalidArgument(format!("ray parameter {d} must be at least 1")));
        }
        Ok(self.defect_on_ray(d))
    }

    fn defect_on_ray(&self, d: f64) -> f64 {
        let x = self.direction.scale(d);
        (self.t_r - self.t_b - self.space.dist(&x, &self.third_sensor) + d - 1.0).abs()
    }

    /// The initial coverand: the segment of the ray with 1 ≤ d ≤ bound + 1.
    pub fn initial_segment(&self) -> Result<Coverand> {
        Coverand::ray_segment(self.space, self.space.origin(), self.direction.clone(), 0.0, self.bound)
    }
}

impl DefectField for RayProblem {
    fn space(&self) -> &LpSpace {
        &self.space
    }

    fn defect_at(&self, x: &Point) -> f64 {
        self.defect_on_ray(self.space.len(x).max(1.0))
    }
}

/// Refining cover along the ray; the report's approximation is within δ of the source.
pub fn recover_outside(rp: &RayProblem, delta: f64) -> Result<SolveReport> {
    recover_outside_traced(rp, delta, &mut |_| {})
}

pub fn recover_outside_traced(
    rp: &RayProblem,
    delta: f64,
    sink: &mut (dyn FnMut(&LevelRecord) + Send),
) -> Result<SolveReport> {
    let cfg = RcConfig::new(delta, rp.initial_segment()?)?;
    let report = solve_field(rp, &cfg, sink)?;
    match report.halt {
        crate::rc::Halt::PrecisionReached => Ok(report),
        halt => Err(Error::Precondition(format!("ray search stopped without reaching precision: {halt:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereOptions {
    pub samples: usize,
    pub classify_tol: f64,
    /// Known bound M with ‖s‖ ≤ M + 1, used only for sources outside the ball.
    pub bound: f64,
    pub delta: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions { samples: DEFAULT_SAMPLES, classify_tol: CLASSIFY_TOL, bound: 5.0, delta: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSolution {
    pub region: Region,
    pub approx: Point,
    pub arrivals: SphericalArrival,
    /// The ray refinement, present for sources outside the unit ball.
    pub ray: Option<SolveReport>,
}

/// The whole pipeline: extremes, classification, then the closed form or the ray search.
pub fn solve_dense_sphere<F>(space: &LpSpace, oracle: F, opts: &SphereOptions) -> Result<SphereSolution>
where
    F: Fn(&Point) -> f64,
{
    solve_dense_sphere_traced(space, oracle, opts, &mut |_| {})
}

pub fn solve_dense_sphere_traced<F>(
    space: &LpSpace,
    oracle: F,
    opts: &SphereOptions,
    sink: &mut (dyn FnMut(&LevelRecord) + Send),
) -> Result<SphereSolution>
where
    F: Fn(&Point) -> f64,
{
    let arrivals = find_extremes(space, &oracle, opts.samples)?;
    match classify(&arrivals, opts.classify_tol)? {
        Region::Inside => Ok(SphereSolution {
            region: Region::Inside,
            approx: arrivals.b.scale(arrivals.spread() / 2.0),
            arrivals,
            ray: None,
        }),
        Region::Outside => {
            let rp = RayProblem::from_arrivals(space, &arrivals, &oracle, opts.samples, opts.bound)?;
            let report = recover_outside_traced(&rp, opts.delta, sink)?;
            Ok(SphereSolution { region: Region::Outside, approx: report.approx.clone(), arrivals, ray: Some(report) })
        }
    }
}

/// Parameters d₋ ≤ 0 ≤ d₊ where the line `s + d·v` crosses the unit sphere,
/// for ‖s‖ ≤ 1 and ‖v‖ = 1.
pub fn line_sphere_crossings(space: &LpSpace, s: &Point, v: &Point) -> Result<(f64, f64)> {
    space.check(s)?;
    space.check(v)?;
    if space.len(s) > 1.0 {
        return Err(Error::Precondition("line origin must lie in the unit ball".into()));
    }
    let vn = space.len(v);
    if vn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let f = |d: f64| space.len(&s.add_scaled(v, d)) - 1.0;
    // f(0) ≤ 0 and f(±(‖s‖ + 1)/‖v‖) ≥ 0 by the triangle inequality
    let reach = (space.len(s) + 1.0) / vn;
    let root = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if f(mid) <= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    Ok((root(0.0, -reach), root(0.0, reach)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{GroundTruth, SrpInstance};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn arrivals(p: f64, s: &[f64], t0: f64) -> (LpSpace, UnitSphereArrivals) {
        let sp = LpSpace::new(s.len(), p).unwrap();
        (sp, UnitSphereArrivals::new(sp, pt(s), t0).unwrap())
    }

    #[test]
    fn extremes_inside() {
        let (sp, gen) = arrivals(2.0, &[0.3, 0.0], 0.0);
        let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
        assert_abs_diff_eq!(arr.t_b, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(arr.t_w, 1.3, epsilon = 1e-12);
        assert!(sp.dist(&arr.b, &pt(&[1.0, 0.0])) < 1e-7);
        assert!(sp.dist(&arr.w, &pt(&[-1.0, 0.0])) < 1e-7);
        assert_eq!(classify(&arr, CLASSIFY_TOL).unwrap(), Region::Inside);
        let s = recover_inside(&arr).unwrap();
        assert!(sp.dist(&s, &gen.source) < 1e-7);
    }

    #[test]
    fn extremes_flat_at_origin() {
        let (sp, gen) = arrivals(2.0, &[0.0, 0.0], 2.5);
        let arr = find_extremes(&sp, |r| gen.arrival(r), 64).unwrap();
        assert_abs_diff_eq!(arr.t_b, 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(arr.t_w, 3.5, epsilon = 1e-12);
        assert_eq!(classify(&arr, CLASSIFY_TOL).unwrap(), Region::Inside);
        assert!(sp.norm(&recover_inside(&arr).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn extremes_outside() {
        let (sp, gen) = arrivals(2.0, &[2.0, 0.0], 0.0);
        let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
        assert_abs_diff_eq!(arr.t_b, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(arr.t_w, 3.0, epsilon = 1e-12);
        assert_eq!(classify(&arr, CLASSIFY_TOL).unwrap(), Region::Outside);
        assert!(recover_inside(&arr).is_err());
    }

    #[test]
    fn l1_is_rejected() {
        let (sp, gen) = arrivals(1.0, &[0.3, 0.0], 0.0);
        assert!(matches!(
            find_extremes(&sp, |r| gen.arrival(r), 64),
            Err(Error::NotStrictlyConvex { .. })
        ));
        let line = LpSpace::euclidean(1);
        assert!(find_extremes(&line, |_| 0.0, 64).is_err());
    }

    fn fake(t_b: f64, t_w: f64) -> SphericalArrival {
        SphericalArrival { t_b, b: pt(&[1.0, 0.0]), t_w, w: pt(&[-1.0, 0.0]) }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&fake(0.7, 1.3), 1e-6).unwrap(), Region::Inside);
        assert_eq!(classify(&fake(1.0, 3.0), 1e-6).unwrap(), Region::Outside);
        assert_eq!(classify(&fake(1.0, 1.0), 1e-6).unwrap(), Region::Inside);
        assert!(matches!(classify(&fake(1.0, 3.1), 1e-6), Err(Error::InconsistentArrivals { .. })));
    }

    #[test]
    fn recover_inside_examples() {
        let s = recover_inside(&fake(0.7, 1.3)).unwrap();
        assert_abs_diff_eq!(s.coords()[0], 0.3, epsilon = 1e-12);
        assert_eq!(s.coords()[1], 0.0);
        assert_eq!(recover_inside(&fake(2.0, 2.0)).unwrap(), pt(&[0.0, 0.0]));

        let (sp, gen) = arrivals(4.0, &[0.2, 0.1], 0.0);
        let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
        assert!(sp.dist(&recover_inside(&arr).unwrap(), &gen.source) < 1e-6);
    }

    fn fixture_ray() -> RayProblem {
        // s = (2, 0), t₀ = 0, third sensor (0, 1)
        let sp = LpSpace::euclidean(2);
        let t_r = 5f64.sqrt();
        RayProblem::new(sp, pt(&[1.0, 0.0]), pt(&[0.0, 1.0]), (1.0, 3.0, t_r), 4.0).unwrap()
    }

    #[test]
    fn ray_defect_examples() {
        let rp = fixture_ray();
        assert_abs_diff_eq!(rp.ray_defect(2.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rp.ray_defect(1.0).unwrap(), (5f64.sqrt() - 1.0 - 2f64.sqrt()).abs(), epsilon = 1e-12);
        assert_abs_diff_eq!(rp.ray_defect(1.0).unwrap(), 0.1781455848733053, epsilon = 1e-12);
        assert!(rp.ray_defect(0.5).is_err());
    }

    #[test]
    fn ray_problem_validation() {
        let sp = LpSpace::euclidean(2);
        assert!(RayProblem::new(sp, pt(&[1.0, 0.0]), pt(&[-1.0, 0.0]), (1.0, 3.0, 3.0), 4.0).is_err());
        assert!(RayProblem::new(sp, pt(&[1.0, 0.0]), pt(&[0.0, 2.0]), (1.0, 3.0, 3.0), 4.0).is_err());
        assert!(RayProblem::new(sp, pt(&[1.0, 0.0]), pt(&[0.0, 1.0]), (1.0, 3.0, 3.0), 0.0).is_err());
    }

    #[test]
    fn recover_outside_examples() {
        let rp = fixture_ray();
        let report = recover_outside(&rp, 1e-3).unwrap();
        assert!(LpSpace::euclidean(2).dist(&report.approx, &pt(&[2.0, 0.0])) < 1e-3);

        // 1-D scan oracle: the unique zero of the ray defect on [1, 5] is d = 2
        let zero = (0..=400_000)
            .map(|i| 1.0 + i as f64 * 1e-5)
            .min_by(|a, b| rp.ray_defect(*a).unwrap().total_cmp(&rp.ray_defect(*b).unwrap()))
            .unwrap();
        assert!((zero - 2.0).abs() <= 1e-5);

        // boundary source s = (1, 0)
        let (sp, gen) = arrivals(2.0, &[1.0, 0.0], 0.0);
        let opts = SphereOptions { bound: 2.0, ..SphereOptions::default() };
        let sol = solve_dense_sphere(&sp, |r| gen.arrival(r), &opts).unwrap();
        assert_eq!(sol.region, Region::Outside);
        assert!(sp.dist(&sol.approx, &gen.source) < 1e-3);
    }

    #[test]
    fn too_small_bound_does_not_claim_precision() {
        let (sp, gen) = arrivals(2.0, &[3.0, 0.0], 0.0);
        let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
        let rp = RayProblem::from_arrivals(&sp, &arr, |r| gen.arrival(r), DEFAULT_SAMPLES, 1.0).unwrap();
        assert!(recover_outside(&rp, 1e-3).is_err());
    }

    #[test]
    fn unique_zero_on_ray() {
        let mut rng = SplitMix::new(21);
        for &p in &[2.0, 3.0, 4.0] {
            for _ in 0..5 {
                let sp = LpSpace::new(2, p).unwrap();
                let dir = sp.scale_to_sphere(&rng.point_in_box(&[-1.0, -1.0], &[1.0, 1.0])).unwrap();
                let norm = rng.uniform(1.0, 4.0);
                let gen = UnitSphereArrivals::new(sp, dir.scale(norm), 0.0).unwrap();
                let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
                let rp = RayProblem::from_arrivals(&sp, &arr, |r| gen.arrival(r), 360, 5.0).unwrap();
                // D restricted to the ray is monotone on either side of its single zero
                let vals: Vec<f64> = (0..=5000).map(|i| rp.ray_defect(1.0 + i as f64 * 1e-3).unwrap()).collect();
                let argmin = (0..vals.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
                assert!(((1.0 + argmin as f64 * 1e-3) - norm).abs() <= 2e-3);
                assert!(vals[..argmin].windows(2).all(|w| w[0] >= w[1]));
                assert!(vals[argmin..].windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn crossings_and_sdn_witness() {
        let mut rng = SplitMix::new(31);
        for &p in &[2.0, 4.0] {
            let sp = LpSpace::new(2, p).unwrap();
            for _ in 0..200 {
                let s = crate::cover::sampling::in_ball(&mut rng, &sp, &sp.origin(), 1.0);
                let x = crate::cover::sampling::in_ball(&mut rng, &sp, &sp.origin(), 1.0);
                let gap = sp.dist(&x, &s);
                if gap < 1e-9 {
                    continue;
                }
                let v = x.sub(&s).scale(1.0 / gap);
                let (dm, dp) = line_sphere_crossings(&sp, &s, &v).unwrap();
                assert!(dm <= 0.0 && dp >= gap - 1e-12);
                let (up, um) = (s.add_scaled(&v, dp), s.add_scaled(&v, dm));
                assert_abs_diff_eq!(sp.len(&up), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(sp.len(&um), 1.0, epsilon = 1e-12);
                let inst = SrpInstance::from_ground_truth(sp, vec![up, um], &GroundTruth::new(s.clone(), 0.3)).unwrap();
                assert!(inst.defect_sup(&x).unwrap() >= 2.0 * gap - 1e-6);
            }
        }
    }

    fn source_with_norm(lo: f64, hi: f64) -> impl Strategy<Value = (LpSpace, Point)> {
        let p = prop_oneof![Just(2.0), Just(4.0), 1.2..6.0f64];
        (2usize..4, p).prop_flat_map(move |(dim, p)| {
            (proptest::collection::vec(-1.0..1.0f64, dim), lo..hi).prop_filter_map("zero direction", move |(v, norm)| {
                let sp = LpSpace::new(dim, p).unwrap();
                let v = pt(&v);
                let len = sp.norm(&v).unwrap();
                (len > 1e-2).then(|| (sp, v.scale(norm / len)))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn extremes_point_along_the_source((sp, s) in source_with_norm(0.05, 4.0), t0 in -1.0..1.0f64) {
            let gen = UnitSphereArrivals::new(sp, s.clone(), t0).unwrap();
            let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
            let u = sp.scale_to_sphere(&s).unwrap();
            prop_assert!(sp.dist(&arr.b, &u) < 1e-6, "b off by {}", sp.dist(&arr.b, &u));
            prop_assert!(sp.dist(&arr.w, &u.scale(-1.0)) < 1e-6, "w off by {}", sp.dist(&arr.w, &u.scale(-1.0)));
        }

        #[test]
        fn inside_sources_classify_inside((sp, s) in source_with_norm(0.0, 1.0 - 1e-3), t0 in -1.0..1.0f64) {
            let gen = UnitSphereArrivals::new(sp, s, t0).unwrap();
            let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
            prop_assert_eq!(classify(&arr, CLASSIFY_TOL).unwrap(), Region::Inside);
        }

        #[test]
        fn outside_sources_classify_outside((sp, s) in source_with_norm(1.0, 6.0), t0 in -1.0..1.0f64) {
            let gen = UnitSphereArrivals::new(sp, s, t0).unwrap();
            let arr = find_extremes(&sp, |r| gen.arrival(r), DEFAULT_SAMPLES).unwrap();
            prop_assert_eq!(classify(&arr, CLASSIFY_TOL).unwrap(), Region::Outside);
        }
    }
}
