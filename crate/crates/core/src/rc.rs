//! Refining-cover solver.
//!
//! Starting from a coverand known to hold the source, every level replaces
//! each surviving coverand by its half-size children and keeps the children
//! whose anchor passes the ball test `D(z) ≤ 2·r_k`. The pivot of a level is
//! the lexicographically smallest surviving anchor; the solver halts once
//! the family spread `d_k = r_k + max ρ(pivot, c')` drops below δ.
//!
//! Levels are synchronous: children of different parents are generated and
//! tested in parallel, then merged, sorted and deduplicated by anchor, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverFamily, Coverand};
use crate::error::{Error, Result};
use crate::problem::{DefectField, DefectKind, SrpInstance, BALL_TEST_SLACK};
use crate::space::Point;

pub const DEFAULT_MAX_LEVEL: u32 = 60;
pub const DEFAULT_MAX_FAMILY: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcConfig {
    /// Target precision δ.
    pub delta: f64,
    /// A coverand known to contain the source.
    pub initial: Coverand,
    pub defect_kind: DefectKind,
    pub max_level: u32,
    pub max_family: usize,
    /// Worker threads for level processing; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl RcConfig {
    pub fn new(delta: f64, initial: Coverand) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("precision {delta} must be positive")));
        }
        Ok(RcConfig {
            delta,
            initial,
            defect_kind: DefectKind::Sup,
            max_level: DEFAULT_MAX_LEVEL,
            max_family: DEFAULT_MAX_FAMILY,
            workers: None,
        })
    }

    pub fn with_defect_kind(mut self, kind: DefectKind) -> Self {
        self.defect_kind = kind;
        self
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = max_level;
        self
    }

    pub fn with_max_family(mut self, max_family: usize) -> Self {
        self.max_family = max_family;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// One line of the per-level trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    pub radius: f64,
    pub coverands: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Halt {
    PrecisionReached,
    BudgetExhausted,
    FamilyOverflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub approx: Point,
    pub levels: Vec<LevelRecord>,
    pub halt: Halt,
}

impl SolveReport {
    pub fn final_spread(&self) -> Option<f64> {
        self.levels.last().map(|l| l.spread)
    }
}

/// Level-by-level refinement state over any defect field.
#[derive(Debug, Clone)]
pub struct Refiner<F> {
    field: F,
    family: CoverFamily,
    max_family: usize,
}

impl<F: DefectField> Refiner<F> {
    pub fn new(field: F, initial: Coverand, max_family: usize) -> Result<Self> {
        field.space().check(initial.anchor())?;
        if initial.space() != field.space() {
            return Err(Error::InvalidArgument("initial coverand lives in a different space".into()));
        }
        let family = CoverFamily::new(0, initial.size(), vec![initial]);
        Ok(Refiner { field, family, max_family })
    }

    pub fn family(&self) -> &CoverFamily {
        &self.family
    }

    pub fn level(&self) -> u32 {
        self.family.level
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Lexicographically smallest anchor of the current family.
    pub fn pivot(&self) -> &Point {
        self.family.members[0].anchor()
    }

    /// Builds the next level. Fails with `NoSurvivors` if every child is excluded
    /// (the initial coverand did not hold the source) and with `FamilyOverflow`
    /// as soon as the survivors found so far exceed the configured limit; the
    /// state is unchanged then.
    pub fn advance(&mut self) -> Result<LevelRecord> {
        let level = self.family.level + 1;
        let radius = self.family.radius / 2.0;
        let threshold = 2.0 * radius + BALL_TEST_SLACK;
        let field = &self.field;
        let chunk = (self.max_family / Coverand::max_ball_children(field.space()).max(2)).max(64);
        let mut survivors: Vec<Coverand> = Vec::new();
        for parents in self.family.members.chunks(chunk) {
            let batches: Vec<Vec<Coverand>> = parents
                .par_iter()
                .map(|parent| {
                    parent
                        .subdivide()
                        .map(|kids| kids.into_iter().filter(|k| field.defect_at(k.anchor()) <= threshold).collect())
                })
                .collect::<Result<_>>()?;
            survivors.extend(batches.into_iter().flatten());
            survivors.par_sort_by(|a, b| a.anchor().lex_cmp(b.anchor()));
            survivors.dedup_by(|a, b| a.anchor().bits_eq(b.anchor()));
            if survivors.len() > self.max_family {
                return Err(Error::FamilyOverflow { level, size: survivors.len() });
            }
        }
        if survivors.is_empty() {
            return Err(Error::NoSurvivors { level });
        }
        self.family = CoverFamily::new(level, radius, survivors);
        let spread = self.family.spread_unchecked(self.pivot());
        Ok(LevelRecord { level, radius, coverands: self.family.len(), spread })
    }
}

pub(crate) fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs the refining cover until the precision is reached or a guard trips.
pub fn rc_solve(inst: &SrpInstance, cfg: &RcConfig) -> Result<SolveReport> {
    rc_solve_traced(inst, cfg, &mut |_| {})
}

/// As [`rc_solve`], handing each level record to `sink` as soon as it is computed.
pub fn rc_solve_traced(
    inst: &SrpInstance,
    cfg: &RcConfig,
    sink: &mut (dyn FnMut(&LevelRecord) + Send),
) -> Result<SolveReport> {
    let field = inst.clone().with_defect_kind(cfg.defect_kind);
    solve_field(&field, cfg, sink)
}

/// The solver loop over an arbitrary defect field. `cfg.defect_kind` is not consulted.
pub fn solve_field<F: DefectField>(
    field: &F,
    cfg: &RcConfig,
    sink: &mut (dyn FnMut(&LevelRecord) + Send),
) -> Result<SolveReport> {
    if !(cfg.delta > 0.0) {
        return Err(Error::InvalidArgument(format!("precision {} must be positive", cfg.delta)));
    }
    let mut refiner = Refiner::new(field, cfg.initial.clone(), cfg.max_family)?;
    in_pool(cfg.workers, move || {
        let mut levels = Vec::new();
        let halt = loop {
            if refiner.level() >= cfg.max_level {
                break Halt::BudgetExhausted;
            }
            let rec = match refiner.advance() {
                Ok(rec) => rec,
                Err(Error::FamilyOverflow { .. }) => break Halt::FamilyOverflow,
                Err(e) => return Err(e),
            };
            sink(&rec);
            levels.push(rec);
            if rec.spread < cfg.delta {
                break Halt::PrecisionReached;
            }
        };
        Ok(SolveReport { approx: refiner.pivot().clone(), levels, halt })
    })?
}

/// One element of the non-halting variant: the pivot c_k of level k.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceItem {
    pub level: u32,
    pub radius: f64,
    pub survivors: usize,
    pub pivot: Point,
}

/// Iterator over the pivots c_1, c_2, … up to `max_level`.
///
/// Stops after the first error (overflow or an empty family).
#[derive(Debug)]
pub struct RcSequence<F> {
    refiner: Refiner<F>,
    max_level: u32,
    done: bool,
}

impl<F: DefectField> RcSequence<F> {
    pub fn family(&self) -> &CoverFamily {
        self.refiner.family()
    }
}

impl<F: DefectField> Iterator for RcSequence<F> {
    type Item = Result<SequenceItem>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.refiner.level() >= self.max_level {
            return None;
        }
        match self.refiner.advance() {
            Ok(rec) => Some(Ok(SequenceItem {
                level: rec.level,
                radius: rec.radius,
                survivors: rec.coverands,
                pivot: self.refiner.pivot().clone(),
            })),
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// The non-halting variant: yields the pivot of every level up to `cfg.max_level`.
pub fn rc_sequence(inst: &SrpInstance, cfg: &RcConfig) -> Result<RcSequence<SrpInstance>> {
    let field = inst.clone().with_defect_kind(cfg.defect_kind);
    Ok(RcSequence {
        refiner: Refiner::new(field, cfg.initial.clone(), cfg.max_family)?,
        max_level: cfg.max_level,
        done: false,
    })
}
