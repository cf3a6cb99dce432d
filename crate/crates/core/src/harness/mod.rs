//! Seeded scenarios, runs and their reports.

mod config;
pub mod selftest;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cover::Coverand;
use crate::epsnet::{run_sequence_traced, CompactFamily, SequenceBudget, DEFAULT_MAX_DEPTH, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::problem::{DefectKind, GroundTruth, SrpInstance};
use crate::rc::{in_pool, rc_solve_traced, Halt, RcConfig, DEFAULT_MAX_FAMILY, DEFAULT_MAX_LEVEL};
use crate::rng::SplitMix;
use crate::space::{LpSpace, Point};
use crate::sphere::{solve_dense_sphere_traced, Region, SphereOptions, UnitSphereArrivals, CLASSIFY_TOL, DEFAULT_SAMPLES};

pub use config::{parse_config, read_config};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorSpec {
    RandomBox { lower: Vec<f64>, upper: Vec<f64>, count: usize, seed: u64 },
    /// r₁ = −e₁, r₂ = θ, r_i = e_{i−2} for 3 ≤ i ≤ m + 2.
    CanonicalL2,
    Explicit(Vec<Point>),
    /// Every point of the unit sphere; only for the sphere algorithm.
    UnitSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    Explicit(Point),
    RandomBox { lower: Vec<f64>, upper: Vec<f64>, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rc,
    Sphere,
    Epsnet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    /// A ball around the center of the source box (or of the sensors' bounding box)
    /// whose radius covers that box.
    Auto,
    Ball { center: Point, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcParams {
    pub max_level: u32,
    pub max_family: usize,
}

impl Default for RcParams {
    fn default() -> Self {
        RcParams { max_level: DEFAULT_MAX_LEVEL, max_family: DEFAULT_MAX_FAMILY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsnetParams {
    /// M in K_n = B[θ; M] ∩ span(e₁..e_n)
    pub radius: f64,
    /// Number of compacts; 0 means the ambient dimension.
    pub n_max: usize,
    pub max_steps: u64,
    pub max_depth: u32,
}

impl Default for EpsnetParams {
    fn default() -> Self {
        EpsnetParams { radius: 1.0, n_max: 0, max_steps: DEFAULT_MAX_STEPS, max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub samples: usize,
    pub bound: f64,
    pub classify_tol: f64,
}

impl Default for SphereParams {
    fn default() -> Self {
        SphereParams { samples: DEFAULT_SAMPLES, bound: 5.0, classify_tol: CLASSIFY_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub space: LpSpace,
    pub sensors: SensorSpec,
    pub source: SourceSpec,
    pub emit_time: f64,
    pub delta: f64,
    pub algorithm: Algorithm,
    pub defect_kind: DefectKind,
    pub initial: InitialSpec,
    pub rc: RcParams,
    pub epsnet: EpsnetParams,
    pub sphere: SphereParams,
    /// Size of the solver's thread pool; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Scenario {
    /// An RC scenario with default parameters and an automatic initial ball.
    pub fn new(space: LpSpace, sensors: SensorSpec, source: SourceSpec, delta: f64) -> Self {
        Scenario {
            space,
            sensors,
            source,
            emit_time: 0.0,
            delta,
            algorithm: Algorithm::Rc,
            defect_kind: DefectKind::Sup,
            initial: InitialSpec::Auto,
            rc: RcParams::default(),
            epsnet: EpsnetParams::default(),
            sphere: SphereParams::default(),
            workers: None,
        }
    }

    /// m = 2, p = 5.6789, 64 sensors and the source drawn from [−10, 10]², δ = 0.1.
    pub fn appendix(sensor_seed: u64, source_seed: u64) -> Self {
        let space = LpSpace::new(2, 5.6789).expect("valid space");
        let (lower, upper) = (vec![-10.0; 2], vec![10.0; 2]);
        Scenario::new(
            space,
            SensorSpec::RandomBox { lower: lower.clone(), upper: upper.clone(), count: 64, seed: sensor_seed },
            SourceSpec::RandomBox { lower, upper, seed: source_seed },
            0.1,
        )
    }

    /// Hex SHA-256 of the scenario's canonical JSON form, leaving out the worker count.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(&Scenario { workers: None, ..self.clone() }).expect("scenario serializes");
        format!("{:x}", Sha256::digest(json))
    }

    fn check_box(&self, lower: &[f64], upper: &[f64], what: &str) -> Result<()> {
        let m = self.space.dim();
        if lower.len() != m || upper.len() != m {
            return Err(Error::Config(format!("{what} box needs {m} bounds per side")));
        }
        if lower.iter().zip(upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Config(format!("{what} box has lower > upper or non-finite bounds")));
        }
        Ok(())
    }

    fn source_point(&self) -> Result<Point> {
        match &self.source {
            SourceSpec::Explicit(p) => {
                self.space.check(p).map_err(config)?;
                Ok(p.clone())
            }
            SourceSpec::RandomBox { lower, upper, seed } => {
                self.check_box(lower, upper, "source")?;
                Ok(SplitMix::new(*seed).point_in_box(lower, upper))
            }
        }
    }

    fn sensor_points(&self) -> Result<Vec<Point>> {
        let m = self.space.dim();
        let pts = match &self.sensors {
            SensorSpec::RandomBox { lower, upper, count, seed } => {
                self.check_box(lower, upper, "sensor")?;
                let mut rng = SplitMix::new(*seed);
                (0..*count).map(|_| rng.point_in_box(lower, upper)).collect()
            }
            SensorSpec::CanonicalL2 => {
                let mut pts = vec![Point::basis(m, 0).scale(-1.0), Point::zeros(m)];
                pts.extend((0..m).map(|i| Point::basis(m, i)));
                pts
            }
            SensorSpec::Explicit(pts) => {
                for p in pts {
                    self.space.check(p).map_err(config)?;
                }
                pts.clone()
            }
            SensorSpec::UnitSphere => {
                return Err(Error::Config("the unit sphere network has no finite sensor list".into()));
            }
        };
        if pts.is_empty() {
            return Err(Error::Config("sensor list is empty".into()));
        }
        Ok(pts)
    }

    /// The initial coverand for the RC algorithm.
    pub fn initial_coverand(&self) -> Result<Coverand> {
        let (center, radius) = match &self.initial {
            InitialSpec::Ball { center, radius } => (center.clone(), *radius),
            InitialSpec::Auto => {
                let (lower, upper) = match (&self.source, &self.sensors) {
                    (SourceSpec::RandomBox { lower, upper, .. }, _) => (lower.clone(), upper.clone()),
                    (_, SensorSpec::RandomBox { lower, upper, .. }) => (lower.clone(), upper.clone()),
                    _ => bounding_box(&self.sensor_points()?),
                };
                let center: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| (l + u) / 2.0).collect();
                let half: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| (u - l) / 2.0).collect();
                let radius = self.space.len_slice(&half);
                (Point::new(center).map_err(config)?, if radius > 0.0 { radius } else { 1.0 })
            }
        };
        Coverand::ball(self.space, center, radius).map_err(config)
    }
}

fn bounding_box(pts: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let m = pts[0].dim();
    let lower = (0..m).map(|i| pts.iter().map(|p| p.coords()[i]).fold(f64::INFINITY, f64::min)).collect();
    let upper = (0..m).map(|i| pts.iter().map(|p| p.coords()[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    (lower, upper)
}

fn config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Draws sensors and source from their seeds and computes the arrival times.
/// Rejects a source outside the RC initial coverand or outside B[θ; M] for the ε-net run.
pub fn generate(sc: &Scenario) -> Result<(SrpInstance, GroundTruth)> {
    if !(sc.emit_time.is_finite()) {
        return Err(Error::Config("emit time must be finite".into()));
    }
    let sensors = sc.sensor_points()?;
    let truth = GroundTruth::new(sc.source_point()?, sc.emit_time);
    let inst = SrpInstance::from_ground_truth(sc.space, sensors, &truth)
        .map_err(config)?
        .with_defect_kind(sc.defect_kind);
    match sc.algorithm {
        Algorithm::Rc => {
            if !sc.initial_coverand()?.contains(&truth.source).map_err(config)? {
                return Err(Error::Config("source lies outside the initial coverand".into()));
            }
        }
        Algorithm::Epsnet => {
            if sc.space.len(&truth.source) > sc.epsnet.radius {
                return Err(Error::Config("source lies outside B[θ; M] of the compact family".into()));
            }
        }
        Algorithm::Sphere => {}
    }
    Ok((inst, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub digest: String,
    pub algorithm: Algorithm,
    /// `iter <k> coverands <N> r_k <r> d_k <d>` for the refining runs.
    pub trace: Vec<String>,
    /// Coverand (or survivor) counts per iteration.
    pub counts: Vec<usize>,
    pub approx: Point,
    pub source: Point,
    pub error: f64,
    /// How the solver stopped, e.g. `precision_reached`, `inside` or `depth_limit`.
    pub halt: String,
    pub success: bool,
    /// r_k of the last level reached, where the algorithm has levels.
    pub final_radius: Option<f64>,
    pub wall_time: f64,
}

impl RunRecord {
    /// The record with its timing field cleared, for comparing runs.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord { wall_time: 0.0, ..self.clone() }
    }

    /// Output in the shape of the classic console run.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (k, n) in self.counts.iter().enumerate() {
            out.push_str(&format!("Iteration {}: {} coverands\n", k + 1, n));
        }
        out.push_str(&format!("Approximated source: {}\n", self.approx));
        out.push_str(&format!("Real source: {}\n", self.source));
        out.push_str(&format!("Distance error: {}\n", self.error));
        out.push_str(&format!("Time: {} sec\n", self.wall_time));
        out
    }

    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

fn trace_line(k: u32, n: usize, r: f64, d: f64) -> String {
    format!("iter {k} coverands {n} r_k {r:.16e} d_k {d:.16e}")
}

fn halt_name<T: Serialize>(h: &T) -> String {
    serde_json::to_value(h).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

/// Generates the scenario and dispatches to its algorithm.
pub fn run(sc: &Scenario) -> Result<RunRecord> {
    let start = Instant::now();
    let mut rec = match sc.algorithm {
        Algorithm::Rc => run_rc(sc)?,
        Algorithm::Sphere => run_sphere(sc)?,
        Algorithm::Epsnet => run_epsnet(sc)?,
    };
    rec.wall_time = start.elapsed().as_secs_f64();
    rec.error = sc.space.dist(&rec.approx, &rec.source);
    Ok(rec)
}

fn blank(sc: &Scenario, source: Point) -> RunRecord {
    RunRecord {
        digest: sc.digest(),
        algorithm: sc.algorithm,
        trace: Vec::new(),
        counts: Vec::new(),
        approx: source.clone(),
        source,
        error: 0.0,
        halt: String::new(),
        success: false,
        final_radius: None,
        wall_time: 0.0,
    }
}

fn run_rc(sc: &Scenario) -> Result<RunRecord> {
    let (inst, truth) = generate(sc)?;
    let mut cfg = RcConfig::new(sc.delta, sc.initial_coverand()?)
        .map_err(config)?
        .with_defect_kind(sc.defect_kind)
        .with_max_level(sc.rc.max_level)
        .with_max_family(sc.rc.max_family);
    cfg.workers = sc.workers;
    let report = rc_solve_traced(&inst, &cfg, &mut |_| {})?;
    let mut rec = blank(sc, truth.source);
    for l in &report.levels {
        rec.trace.push(trace_line(l.level, l.coverands, l.radius, l.spread));
        rec.counts.push(l.coverands);
    }
    rec.approx = report.approx;
    rec.halt = halt_name(&report.halt);
    rec.success = report.halt == Halt::PrecisionReached;
    rec.final_radius = report.levels.last().map(|l| l.radius);
    Ok(rec)
}

fn run_sphere(sc: &Scenario) -> Result<RunRecord> {
    if sc.sensors != SensorSpec::UnitSphere {
        return Err(Error::Config("the sphere algorithm needs the unit_sphere sensor kind".into()));
    }
    let source = sc.source_point()?;
    let arrivals = UnitSphereArrivals::new(sc.space, source.clone(), sc.emit_time).map_err(config)?;
    let opts = SphereOptions {
        samples: sc.sphere.samples,
        classify_tol: sc.sphere.classify_tol,
        bound: sc.sphere.bound,
        delta: sc.delta,
    };
    let sol = in_pool(sc.workers, || solve_dense_sphere_traced(&sc.space, |r| arrivals.arrival(r), &opts, &mut |_| {}))??;
    let mut rec = blank(sc, source);
    match &sol.ray {
        Some(report) => {
            for l in &report.levels {
                rec.trace.push(trace_line(l.level, l.coverands, l.radius, l.spread));
                rec.counts.push(l.coverands);
            }
            rec.halt = halt_name(&report.halt);
            rec.success = report.halt == Halt::PrecisionReached;
            rec.final_radius = report.levels.last().map(|l| l.radius);
        }
        None => {
            rec.halt = halt_name(&Region::Inside);
            rec.success = true;
        }
    }
    rec.approx = sol.approx;
    Ok(rec)
}

fn run_epsnet(sc: &Scenario) -> Result<RunRecord> {
    let (inst, truth) = generate(sc)?;
    let n_max = if sc.epsnet.n_max == 0 { sc.space.dim() } else { sc.epsnet.n_max };
    let fam = CompactFamily::coordinate_balls(sc.space, sc.epsnet.radius, n_max).map_err(config)?;
    let budget = SequenceBudget { max_steps: sc.epsnet.max_steps, max_depth: sc.epsnet.max_depth };
    let state = in_pool(sc.workers, || run_sequence_traced(&inst, &fam, budget, &mut |_| {}))??;
    let mut rec = blank(sc, truth.source);
    for (i, step) in state.trace.iter().enumerate() {
        rec.trace.push(format!(
            "iter {} n {} k {} coverands {} r_k {:.16e}",
            i + 1,
            step.n,
            step.k,
            step.survivors,
            step.radius
        ));
        rec.counts.push(step.survivors);
    }
    rec.approx = state.last().cloned().ok_or_else(|| Error::Precondition("no point was emitted".into()))?;
    rec.halt = halt_name(&state.exit);
    rec.success = true;
    rec.final_radius = Some(state.depth_radius);
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn explicit_f1_passthrough() {
        let sc = Scenario::new(
            LpSpace::euclidean(1),
            SensorSpec::Explicit(vec![pt(&[0.0]), pt(&[1.0])]),
            SourceSpec::Explicit(pt(&[0.5])),
            1e-3,
        );
        let (inst, truth) = generate(&sc).unwrap();
        assert_eq!(inst, crate::problem::fixtures::f1());
        assert_eq!(truth.source, pt(&[0.5]));
        let rec = run(&sc).unwrap();
        assert!(rec.success && rec.error < 1e-3);
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = generate(&Scenario::appendix(42, 43)).unwrap();
        let b = generate(&Scenario::appendix(42, 43)).unwrap();
        assert_eq!(a, b);
        let c = generate(&Scenario::appendix(42, 44)).unwrap();
        assert_ne!(a.1, c.1);
        assert_eq!(a.0.sensors(), c.0.sensors());
    }

    #[test]
    fn appendix_run() {
        let sc = Scenario::appendix(1, 2);
        let rec = run(&sc).unwrap();
        assert_eq!(rec.halt, "precision_reached");
        assert!(rec.error < 0.1);
        assert_eq!(rec.trace.len(), rec.counts.len());
        assert!(rec.trace[0].starts_with("iter 1 coverands "));
        assert!(rec.summary().contains("Approximated source: Point(["));
        assert_eq!(sc.digest().len(), 64);
    }

    #[test]
    fn sphere_inside_run() {
        let mut sc = Scenario::new(LpSpace::euclidean(2), SensorSpec::UnitSphere, SourceSpec::Explicit(pt(&[0.3, 0.0])), 1e-3);
        sc.algorithm = Algorithm::Sphere;
        let rec = run(&sc).unwrap();
        assert_eq!(rec.halt, "inside");
        assert!(rec.error < 1e-6);
        assert!(rec.trace.is_empty());
    }

    #[test]
    fn epsnet_run() {
        let mut sc = Scenario::new(LpSpace::euclidean(2), SensorSpec::CanonicalL2, SourceSpec::Explicit(pt(&[0.0, 0.5])), 1e-3);
        sc.algorithm = Algorithm::Epsnet;
        sc.epsnet.max_depth = 24;
        let rec = run(&sc).unwrap();
        assert_eq!(rec.halt, "depth_limit");
        assert!(rec.error < 2.0 * rec.final_radius.unwrap());
    }

    #[test]
    fn a5_violation_rejected() {
        let mut sc = Scenario::appendix(1, 2);
        sc.initial = InitialSpec::Ball { center: pt(&[100.0, 100.0]), radius: 1.0 };
        assert!(matches!(generate(&sc), Err(Error::Config(_))));
        let mut sc = Scenario::appendix(1, 2);
        sc.sensors = SensorSpec::Explicit(vec![]);
        assert!(matches!(generate(&sc), Err(Error::Config(_))));
    }

    #[test]
    fn canonical_sensors() {
        let sc = Scenario::new(LpSpace::euclidean(3), SensorSpec::CanonicalL2, SourceSpec::Explicit(pt(&[0.1, 0.2, 0.3])), 0.1);
        let (inst, _) = generate(&sc).unwrap();
        let want = [[-1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let got: Vec<Vec<f64>> = inst.sensors().iter().map(|p| p.coords().to_vec()).collect();
        assert_eq!(got, want.iter().map(|w| w.to_vec()).collect::<Vec<_>>());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn reported_error_matches_recomputed(sensor_seed in any::<u64>(), source_seed in any::<u64>()) {
            let sc = Scenario::appendix(sensor_seed, source_seed);
            let rec = run(&sc).unwrap();
            let back: RunRecord = serde_json::from_str(&rec.to_json()).unwrap();
            prop_assert_eq!(&back, &rec);
            let recomputed = sc.space.distance(&back.approx, &back.source).unwrap();
            prop_assert!((recomputed - back.error).abs() <= 1e-12);
        }

        #[test]
        fn same_config_same_report(sensor_seed in any::<u64>(), source_seed in any::<u64>()) {
            let sc = Scenario::appendix(sensor_seed, source_seed);
            let (a, b) = (run(&sc).unwrap(), run(&sc.clone()).unwrap());
            prop_assert_eq!(a.without_timing().to_json(), b.without_timing().to_json());
            prop_assert_eq!(a.trace_text(), b.trace_text());
        }
    }
}
