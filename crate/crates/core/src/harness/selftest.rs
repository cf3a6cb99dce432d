//! A quick invariant sweep for the `selftest` command.

use crate::cover::Coverand;
use crate::epsnet::{run_sequence, CompactFamily, Mu, SequenceBudget};
use crate::problem::{DefectKind, GroundTruth, SrpInstance, BALL_TEST_SLACK};
use crate::rc::{rc_solve, Halt, RcConfig};
use crate::rng::SplitMix;
use crate::space::{LpSpace, Point};
use crate::sphere::{solve_dense_sphere, Region, SphereOptions, UnitSphereArrivals};

use super::{run, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult { name, passed: true, detail },
        Err(detail) => CheckResult { name, passed: false, detail },
    }
}

fn random_instance(rng: &mut SplitMix, space: LpSpace, n: usize) -> (SrpInstance, Point) {
    let m = space.dim();
    let (lo, hi) = (vec![-5.0; m], vec![5.0; m]);
    let sensors = (0..n).map(|_| rng.point_in_box(&lo, &hi)).collect();
    let s = rng.point_in_box(&lo, &hi);
    let inst = SrpInstance::from_ground_truth(space, sensors, &GroundTruth::new(s.clone(), rng.uniform(-1.0, 1.0)))
        .expect("valid instance");
    (inst, s)
}

pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("defect lipschitz", || {
            let mut rng = SplitMix::new(11);
            let mut worst = f64::NEG_INFINITY;
            for &p in &[1.0, 2.0, 3.5, 5.6789] {
                let sp = LpSpace::new(2, p).map_err(|e| e.to_string())?;
                for _ in 0..200 {
                    let (inst, s) = random_instance(&mut rng, sp, 8);
                    let x = rng.point_in_box(&[-8.0, -8.0], &[8.0, 8.0]);
                    let y = rng.point_in_box(&[-8.0, -8.0], &[8.0, 8.0]);
                    for kind in [DefectKind::Sup, DefectKind::Sum] {
                        let inst = inst.clone().with_defect_kind(kind);
                        let gap = (inst.defect(&x).unwrap() - inst.defect(&y).unwrap()).abs() - 2.0 * sp.dist(&x, &y);
                        worst = worst.max(gap);
                    }
                    if inst.defect_sum(&x).unwrap() > inst.defect_sup(&x).unwrap() + 1e-12 || inst.defect_sup(&s).unwrap() > 1e-12 {
                        return Err(format!("domination or zero-at-source fails at p = {p}"));
                    }
                }
            }
            if worst <= 1e-12 { Ok(format!("max excess {worst:.3e}")) } else { Err(format!("excess {worst:e}")) }
        }),
        check("ball test soundness", || {
            let mut rng = SplitMix::new(12);
            let sp = LpSpace::new(2, 3.0).map_err(|e| e.to_string())?;
            for _ in 0..1000 {
                let (inst, s) = random_instance(&mut rng, sp, 6);
                let r = rng.uniform(1e-3, 3.0);
                let c = s.add(&rng.point_in_box(&[-r, -r], &[r, r]));
                if sp.dist(&c, &s) <= r && !inst.ball_test(&c, r).unwrap() {
                    return Err(format!("ball around {c} excluded the source"));
                }
            }
            Ok("1000 balls".into())
        }),
        check("appendix run", || {
            let rec = run(&Scenario::appendix(1, 2)).map_err(|e| e.to_string())?;
            if rec.success && rec.error < 0.1 {
                Ok(format!("error {:.4} in {} iterations", rec.error, rec.counts.len()))
            } else {
                Err(format!("halt {} error {}", rec.halt, rec.error))
            }
        }),
        check("rc on the line", || {
            let sp = LpSpace::euclidean(1);
            let sensors = vec![Point::new(vec![0.0]).unwrap(), Point::new(vec![1.0]).unwrap()];
            let s = Point::new(vec![0.3]).unwrap();
            let inst = SrpInstance::from_ground_truth(sp, sensors, &GroundTruth::new(s.clone(), 0.0)).unwrap();
            let init = Coverand::ball(sp, Point::new(vec![0.5]).unwrap(), 0.5).unwrap();
            let rep = rc_solve(&inst, &RcConfig::new(1e-6, init).unwrap()).map_err(|e| e.to_string())?;
            let e = sp.dist(&rep.approx, &s);
            if rep.halt == Halt::PrecisionReached && e < 1e-6 { Ok(format!("error {e:.2e}")) } else { Err(format!("error {e}")) }
        }),
        check("sphere method", || {
            let sp = LpSpace::new(2, 4.0).map_err(|e| e.to_string())?;
            let opts = SphereOptions { bound: 5.0, delta: 1e-3, ..SphereOptions::default() };
            for (coords, region, tol) in [([0.3, -0.2], Region::Inside, 1e-6), ([1.5, 2.0], Region::Outside, 1e-3)] {
                let gen = UnitSphereArrivals::new(sp, Point::new(coords.to_vec()).unwrap(), 0.7).unwrap();
                let sol = solve_dense_sphere(&sp, |r| gen.arrival(r), &opts).map_err(|e| e.to_string())?;
                let e = sp.dist(&sol.approx, &gen.source);
                if sol.region != region || e >= tol {
                    return Err(format!("{coords:?}: region {:?} error {e}", sol.region));
                }
            }
            Ok("inside and outside sources recovered".into())
        }),
        check("epsnet bookkeeping", || {
            let sp = LpSpace::euclidean(2);
            let sensors = [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().map(|c| Point::new(c.to_vec()).unwrap()).collect();
            let s = Point::new(vec![0.0, 0.5]).unwrap();
            let inst = SrpInstance::from_ground_truth(sp, sensors, &GroundTruth::new(s.clone(), 0.0)).unwrap();
            let fam = CompactFamily::coordinate_balls(sp, 1.0, 2).unwrap();
            let st = run_sequence(&inst, &fam, SequenceBudget { max_steps: 10_000, max_depth: 20 }).map_err(|e| e.to_string())?;
            let e = sp.dist(st.last().unwrap(), &s);
            let finalized = matches!(st.mu[0], Mu::Finalized(_));
            if st.n == 2 && finalized && e < 2.0 * st.depth_radius + BALL_TEST_SLACK {
                Ok(format!("μ_1 = {:?}, error {e:.2e}", st.mu[0]))
            } else {
                Err(format!("n = {} μ = {:?} error {e}", st.n, st.mu))
            }
        }),
        check("determinism", || {
            let mut sc = Scenario::appendix(3, 4);
            let a = run(&sc).map_err(|e| e.to_string())?;
            sc.workers = Some(1);
            let b = run(&sc).map_err(|e| e.to_string())?;
            if a.without_timing().to_json() == b.without_timing().to_json() {
                Ok("identical reports".into())
            } else {
                Err("reports differ across worker counts".into())
            }
        }),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for r in super::run_all() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
