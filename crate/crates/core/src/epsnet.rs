//! Refining ε-neighborhood-covers of a growing sequence of compacts.
//!
//! The compacts are balls in coordinate subspaces, `K_n = B[θ; M] ∩ span(e₁, …, e_n)`.
//! For each n the driver walks levels k = 1, 2, … with covers of radius
//! `r_k = r/2^(k−1)` built from (r_k/2)-nets of K_n, keeps the centers that
//! pass the ball test `D(c) ≤ 2r_k`, and emits `x_{n−1+k}`. When a level has
//! no survivors, μ_n is fixed, `x_n := x_{n−1+μ_n}`, the tail is discarded and
//! n advances.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{odometer, BallGrid};
use crate::problem::{DefectField, SrpInstance, BALL_TEST_SLACK};
use crate::space::{LpSpace, Point};

pub const DEFAULT_MAX_STEPS: u64 = 100_000;
pub const DEFAULT_MAX_DEPTH: u32 = 32;

/// `B[θ; radius] ∩ span(e₁, …, e_active)` inside an ℓ_p space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBall {
    pub space: LpSpace,
    pub active: usize,
    pub radius: f64,
}

impl SubspaceBall {
    pub fn new(space: LpSpace, active: usize, radius: f64) -> Result<Self> {
        if active == 0 || active > space.dim() {
            return Err(Error::InvalidArgument(format!(
                "active coordinate count {active} must be in 1..={}",
                space.dim()
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
        }
        Ok(SubspaceBall { space, active, radius })
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.space.check(x)?;
        Ok(x.coords()[self.active..].iter().all(|&c| c == 0.0) && self.space.len(x) <= self.radius)
    }

    /// Grid step giving an eps-net: eps·n^(−1/p).
    fn step(&self, eps: f64) -> f64 {
        eps / (self.active as f64).powf(1.0 / self.space.p())
    }
}

/// The nested family K_1 ⊆ K_2 ⊆ … together with the bound r ≥ diam A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactFamily {
    members: Vec<SubspaceBall>,
    diam_bound: f64,
}

impl CompactFamily {
    pub fn new(members: Vec<SubspaceBall>, diam_bound: f64) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("compact family is empty".into()))?;
        for pair in members.windows(2) {
            if pair[1].space != first.space || pair[1].radius != first.radius || pair[1].active < pair[0].active {
                return Err(Error::InvalidArgument("compacts must share space and radius and be nested".into()));
            }
        }
        if !(diam_bound > 0.0 && diam_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("diameter bound {diam_bound} must be positive")));
        }
        Ok(CompactFamily { members, diam_bound })
    }

    /// K_n = B[θ; M] ∩ span(e₁..e_n) for n = 1..=n_max, with A = B[θ; M] and r = 2M.
    pub fn coordinate_balls(space: LpSpace, radius: f64, n_max: usize) -> Result<Self> {
        let members = (1..=n_max)
            .map(|n| SubspaceBall::new(space, n, radius))
            .collect::<Result<Vec<_>>>()?;
        CompactFamily::new(members, 2.0 * radius)
    }

    pub fn members(&self) -> &[SubspaceBall] {
        &self.members
    }

    pub fn diam_bound(&self) -> f64 {
        self.diam_bound
    }

    pub fn space(&self) -> &LpSpace {
        &self.members[0].space
    }

    /// K_n, 1-based.
    pub fn member(&self, n: usize) -> Option<&SubspaceBall> {
        n.checked_sub(1).and_then(|i| self.members.get(i))
    }

    /// r_k = r/2^(k−1)
    pub fn level_radius(&self, k: u32) -> f64 {
        self.diam_bound / 2f64.powi(k as i32 - 1)
    }
}

/// Centers of the cover balls B[c; radius].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetCover {
    /// 0 for nets built outside a sequence run.
    pub level: u32,
    pub radius: f64,
    pub centers: Vec<Point>,
}

impl NetCover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// An eps-net of K from an axis grid clipped to K; the returned balls have radius 2·eps.
pub fn build_net(k: &SubspaceBall, eps: f64) -> Result<NetCover> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("net parameter {eps} must be positive")));
    }
    let origin = k.space.origin();
    let centers = if eps >= k.radius * (k.active as f64).powf(1.0 / k.space.p()) {
        vec![origin]
    } else {
        BallGrid::new(&k.space, &origin, k.radius, k.step(eps), k.active).points()
    };
    Ok(NetCover { level: 0, radius: 2.0 * eps, centers })
}

/// The centers of `net` passing the ball test `D(c) ≤ 2·radius`, in their original order.
pub fn survivors(inst: &SrpInstance, net: &NetCover) -> Result<NetCover> {
    if let Some(c) = net.centers.first() {
        inst.space().check(c)?;
    }
    Ok(NetCover { level: net.level, radius: net.radius, centers: passing(inst, &net.centers, net.radius) })
}

fn passing<F: DefectField>(field: &F, centers: &[Point], radius: f64) -> Vec<Point> {
    let bound = 2.0 * radius + BALL_TEST_SLACK;
    centers.par_iter().filter(|c| field.defect_at(c) <= bound).cloned().collect()
}

/// Net points of level k that lie within r_k of some survivor of level k − 1.
///
/// Every level-k survivor is within r_k of a level-(k−1) net point, and that
/// point has defect at most 2r_k + 2r_k = 2r_{k−1}, so it survived too.
/// Testing only these candidates therefore yields the full survivor set.
fn candidates(k: &SubspaceBall, eps: f64, previous: &[Point]) -> Vec<Point> {
    let origin = k.space.origin();
    let grid = BallGrid::new(&k.space, &origin, k.radius, k.step(eps), k.active);
    let step = k.step(eps);
    let reach = 2.0 * eps;
    // a projected point sits within eps/2 of its raw grid position, per coordinate too
    let pad = reach + eps / 2.0;
    let found: Vec<Vec<Vec<i64>>> = previous
        .par_iter()
        .map(|prev| {
            let c = &prev.coords()[..k.active];
            let lo: Vec<i64> = c.iter().map(|x| ((x - pad) / step).floor() as i64).collect();
            let hi: Vec<i64> = c.iter().map(|x| ((x + pad) / step).ceil() as i64).collect();
            odometer(&lo, &hi)
                .filter(|j| grid.point(j).is_some_and(|pt| k.space.dist(&pt, prev) <= reach * (1.0 + 1e-9)))
                .collect()
        })
        .collect();
    let unique: BTreeSet<Vec<i64>> = found.into_iter().flatten().collect();
    unique.iter().filter_map(|j| grid.point(j)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mu {
    Finalized(u32),
    /// Still running at exit; every level reached had survivors.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceExit {
    StepBudget,
    /// The current n reached the depth cap with survivors at every level.
    DepthLimit,
    /// μ_n was finite for every compact in the family.
    FamilyExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceBudget {
    pub max_steps: u64,
    pub max_depth: u32,
}

impl Default for SequenceBudget {
    fn default() -> Self {
        SequenceBudget { max_steps: DEFAULT_MAX_STEPS, max_depth: DEFAULT_MAX_DEPTH }
    }
}

/// One (n, k) step of the driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub k: u32,
    pub radius: f64,
    pub survivors: usize,
    /// x_{n−1+k}, absent when the level was empty.
    pub chosen: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceState {
    /// The compact being refined at exit.
    pub n: usize,
    /// μ_1, μ_2, …; the last entry belongs to the current n.
    pub mu: Vec<Mu>,
    /// x_1, x_2, … as they stand at exit.
    pub xs: Vec<Point>,
    /// How often each x_j was set, replaced or discarded.
    pub changes: Vec<u64>,
    pub trace: Vec<StepRecord>,
    pub steps: u64,
    pub exit: SequenceExit,
    /// Deepest level reached at the current n.
    pub depth: u32,
    pub depth_radius: f64,
}

impl SequenceState {
    pub fn last(&self) -> Option<&Point> {
        self.xs.last()
    }

    fn set(&mut self, j: usize, x: Point) {
        if self.xs.len() < j {
            self.xs.push(x);
            if self.changes.len() < j {
                self.changes.push(0);
            }
            self.changes[j - 1] += 1;
        } else if !self.xs[j - 1].bits_eq(&x) {
            self.xs[j - 1] = x;
            self.changes[j - 1] += 1;
        }
    }

    fn truncate(&mut self, len: usize) {
        for j in len..self.xs.len() {
            self.changes[j] += 1;
        }
        self.xs.truncate(len);
    }
}

/// Runs the (n, k) loop until the step budget, the depth cap or the family runs out.
pub fn run_sequence(inst: &SrpInstance, fam: &CompactFamily, budget: SequenceBudget) -> Result<SequenceState> {
    run_sequence_traced(inst, fam, budget, &mut |_| {})
}

pub fn run_sequence_traced(
    inst: &SrpInstance,
    fam: &CompactFamily,
    budget: SequenceBudget,
    sink: &mut dyn FnMut(&StepRecord),
) -> Result<SequenceState> {
    if inst.space() != fam.space() {
        return Err(Error::InvalidArgument("instance and compact family live in different spaces".into()));
    }
    if budget.max_depth == 0 {
        return Err(Error::InvalidArgument("depth cap must be at least 1".into()));
    }
    let mut state = SequenceState {
        n: 1,
        mu: vec![Mu::Open],
        xs: Vec::new(),
        changes: Vec::new(),
        trace: Vec::new(),
        steps: 0,
        exit: SequenceExit::StepBudget,
        depth: 0,
        depth_radius: fam.diam_bound(),
    };
    let mut previous: Vec<Point> = Vec::new();
    let mut k: u32 = 1;
    loop {
        if state.steps >= budget.max_steps {
            state.exit = SequenceExit::StepBudget;
            break;
        }
        if k > budget.max_depth {
            state.exit = SequenceExit::DepthLimit;
            break;
        }
        let compact = *fam.member(state.n).expect("n stays within the family");
        let radius = fam.level_radius(k);
        let eps = radius / 2.0;
        let net = if k == 1 { build_net(&compact, eps)?.centers } else { candidates(&compact, eps, &previous) };
        let mut passed = passing(inst, &net, radius);
        passed.sort_by(|a, b| a.lex_cmp(b));
        state.steps += 1;

        let rec = StepRecord { n: state.n, k, radius, survivors: passed.len(), chosen: passed.first().cloned() };
        sink(&rec);
        state.trace.push(rec);

        match passed.first() {
            Some(x) => {
                state.set(state.n - 1 + k as usize, x.clone());
                state.depth = k;
                state.depth_radius = radius;
                previous = passed;
                k += 1;
            }
            None if k == 1 => {
                return Err(Error::Precondition(format!(
                    "no center of K_{} passes the first test; the diameter bound is too small",
                    state.n
                )));
            }
            None => {
                let mu = k - 1;
                let n = state.n;
                *state.mu.last_mut().expect("current n has a record") = Mu::Finalized(mu);
                let replacement = state.xs[n - 1 + mu as usize - 1].clone();
                state.set(n, replacement);
                state.truncate(n);
                if fam.member(n + 1).is_none() {
                    state.exit = SequenceExit::FamilyExhausted;
                    break;
                }
                state.n = n + 1;
                state.mu.push(Mu::Open);
                previous.clear();
                k = 1;
            }
        }
    }
    Ok(state)
}
