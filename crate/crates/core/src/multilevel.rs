//! Two- and three-level execution.
//!
//! A shadow copy of the search runs at a cheaper tier starting from
//! `A = B = I`. Its integer updates are folded back into the parent by matrix
//! multiplication ("flush") once they grow too large or `min|y|` gets too
//! small for the tier. The two-level scheme nests a double-precision shadow in
//! the full state; the three-level scheme nests a double shadow in an
//! intermediate shadow in the full state.

use rug::{Float, Integer};

use crate::config::{Algorithm, LevelConfig, PrecisionConfig, TierLimits};
use crate::error::{Error, Result};
use crate::kernel::{Core, Orientation};
use crate::lq::lq_in_place;
use crate::matrix::Matrix;
use crate::multipair::{mp_init_state, mp_run, CycleGuard};
use crate::parallel::{par_matmul, Executor};
use crate::precision::{bits_for_digits, Entry, Real, Tier};
use crate::pslq::{
    found_outcome, init_state, record_of, run, LevelCount, Observer, RelationOutcome, Status,
    Thresholds, Verdict,
};

/// Reduced-precision replica of a parent state.
#[derive(Clone, Debug)]
pub struct ShadowState<R: Real, I: Entry<R>> {
    pub tier: Tier,
    pub core: Core<R, I>,
    /// Power-of-two exponent applied to `H` at spawn (0 when unscaled).
    pub scale: i32,
    /// `log10` of the factor that maps the shadow `y` back to true magnitude.
    pub y_scale_log10: f64,
    /// Arrays before the most recent iteration.
    pub saved_prev: Option<Core<R, I>>,
    pub iterations: u64,
    /// Pairs exchanged by the most recent iteration.
    pub last_pairs: usize,
    guard: CycleGuard<R>,
    single_next: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlushReason {
    EntryCap,
    YFloor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShadowSignal {
    Continue,
    FlushNeeded(FlushReason),
    /// The iteration was undone; the shadow holds the previous arrays.
    Abandon,
}

/// One iteration of `algo` on `core`; returns the number of pairs exchanged.
fn algo_step<R: Real, I: Entry<R>>(
    core: &mut Core<R, I>,
    algo: Algorithm,
    beta: f64,
    guard: &mut CycleGuard<R>,
    single_next: &mut bool,
    exec: &Executor,
) -> Result<usize> {
    match algo {
        Algorithm::Pslq => core.pslq_step(exec).map(|_| 1),
        Algorithm::MultiPair => {
            let pairs = core.multipair_step(beta, single_next.then_some(1), exec)?;
            *single_next = guard.observe(&core.y);
            Ok(pairs.len())
        }
    }
}

/// `max|y| / min|y|`, or `None` when some entry is zero.
fn dynamic_range(core: &Core<Float, Integer>) -> Option<Float> {
    let (_, min, max) = core.y_extremes();
    if min.is_zero() {
        return None;
    }
    Some(max / min)
}

/// Demotes `h`, scaling by a power of two only when the plain conversion
/// leaves the tier's range.
fn demote_h<R: Real>(h: &Matrix<Float>, ctx: R::Ctx) -> Result<(Matrix<R>, i32)> {
    if let Ok(m) = h.try_map(|v| R::demote(v, ctx)) {
        return Ok((m, 0));
    }
    let emax = h
        .iter()
        .filter(|v| !v.is_zero())
        .filter_map(|v| v.get_exp())
        .max()
        .unwrap_or(0);
    let scale = -emax;
    let m = h.try_map(|v| R::demote(&Float::with_val(v.prec(), v << scale), ctx))?;
    Ok((m, scale))
}

/// Builds a shadow from `parent`: identity `A`, `B`; `y` scaled so its
/// largest entry is one; `H` demoted and LQ-factored.
pub fn spawn_shadow<R: Real, I: Entry<R>>(
    parent: &Core<Float, Integer>,
    tier: Tier,
    limits: &TierLimits,
    gamma: &Float,
    ctx: R::Ctx,
    parent_scale_log10: f64,
) -> Result<ShadowState<R, I>> {
    let violation = |value: String| Error::RangeViolation {
        value,
        tier: tier.name().to_string(),
    };
    let range = dynamic_range(parent).ok_or_else(|| violation("0".into()))?;
    if range > limits.max_range {
        return Err(violation(format!("dynamic range {:.3e}", range.to_f64())));
    }
    let (_, _, max) = parent.y_extremes();
    let y = parent
        .y
        .iter()
        .map(|v| R::demote(&Float::with_val(v.prec(), v / &max), ctx))
        .collect::<Result<Vec<R>>>()?;
    let (mut h, scale) = demote_h::<R>(&parent.h, ctx)?;
    lq_in_place(&mut h)?;
    let g = R::demote(gamma, ctx)?;
    let core = Core::from_parts(y, h, &g, parent.orientation, true);
    Ok(ShadowState {
        tier,
        core,
        scale,
        y_scale_log10: parent_scale_log10 + Real::log10_abs(&max),
        saved_prev: None,
        iterations: 0,
        last_pairs: 0,
        guard: CycleGuard::new(),
        single_next: false,
    })
}

/// Checks the flush thresholds on a shadow core carrying `bits` binary digits.
fn flush_reason<R: Real, I: Entry<R>>(
    core: &Core<R, I>,
    limits: &TierLimits,
    bits: u32,
) -> Option<FlushReason> {
    if core.max_entry().log10_abs() >= limits.entry_cap.log10() {
        return Some(FlushReason::EntryCap);
    }
    let (_, min, _) = core.y_extremes();
    if min.is_zero() || min.log10_abs() <= limits.y_floor.log10() {
        return Some(FlushReason::YFloor);
    }
    if let Some(margin) = limits.noise_margin {
        // y = x̂·B at this tier carries absolute error of order eps·n·max|B|
        let noise = margin.log10() + (core.n as f64).log10() + core.max_entry().log10_abs()
            - bits as f64 * std::f64::consts::LOG10_2;
        if min.log10_abs() <= noise {
            return Some(FlushReason::YFloor);
        }
    }
    None
}

/// True when every `A`/`B` entry is an integer the tier holds exactly and
/// `y`, `H` are finite.
fn shadow_sound<R: Real, I: Entry<R>>(core: &Core<R, I>, exact_bits: u32) -> bool {
    let exact = core
        .max_entry()
        .to_integer()
        .map(|v| v.significant_bits() <= exact_bits)
        .unwrap_or(false);
    exact && core.y.iter().chain(core.h.iter()).all(Real::is_finite)
}

fn exact_bits(tier: Tier) -> u32 {
    match tier {
        Tier::Double => 54,
        Tier::Intermediate(d) | Tier::Full(d) => bits_for_digits(d),
    }
}

/// One shadow iteration followed by the flush and overflow checks.
pub fn shadow_iterate<R: Real, I: Entry<R>>(
    shadow: &mut ShadowState<R, I>,
    algo: Algorithm,
    beta: f64,
    limits: &TierLimits,
) -> ShadowSignal {
    let prev = shadow.core.clone();
    let prev_guard = shadow.guard.clone();
    let prev_single = shadow.single_next;
    let seq = Executor::sequential();
    let res = algo_step(
        &mut shadow.core,
        algo,
        beta,
        &mut shadow.guard,
        &mut shadow.single_next,
        &seq,
    );
    let pairs = match res {
        Ok(p) if shadow_sound(&shadow.core, exact_bits(shadow.tier)) => p,
        _ => {
            shadow.core = prev;
            shadow.guard = prev_guard;
            shadow.single_next = prev_single;
            return ShadowSignal::Abandon;
        }
    };
    shadow.saved_prev = Some(prev);
    shadow.iterations += 1;
    shadow.last_pairs = pairs;
    match flush_reason(&shadow.core, limits, exact_bits(shadow.tier)) {
        Some(r) => ShadowSignal::FlushNeeded(r),
        None => ShadowSignal::Continue,
    }
}

fn int_matmul(
    exec: &Executor,
    l: &Matrix<Integer>,
    r: &Matrix<Integer>,
) -> Result<Matrix<Integer>> {
    par_matmul(exec, l, r, &Integer::new(), |acc, a, b| *acc += a * b)
}

/// Folds the shadow's accumulated updates into `parent`:
/// `y := y·B̄, B := B·B̄` (column orientation) or `y := B̄·y, B := B̄·B` (row
/// orientation), then `A := Ā·A` when `A` is kept and `H := Ā·H`.
pub fn flush_updates<R: Real, I: Entry<R>>(
    parent: &mut Core<Float, Integer>,
    shadow: &ShadowState<R, I>,
    exec: &Executor,
) -> Result<()> {
    let n = parent.n;
    let bbar = shadow.core.b.try_map(Entry::to_integer)?;
    let abar = shadow
        .core
        .a
        .as_ref()
        .ok_or_else(|| Error::InexactShadow("shadow has no A".into()))?
        .try_map(Entry::to_integer)?;
    let check = match parent.orientation {
        Orientation::Columns => int_matmul(exec, &abar, &bbar)?,
        Orientation::Rows => int_matmul(exec, &abar, &bbar.transpose())?,
    };
    let one = Integer::from(1);
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { &one } else { &Integer::ZERO };
            if check[(i, j)] != *expect {
                return Err(Error::InexactShadow(format!(
                    "shadow A·B differs from I at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let prec = parent.y[0].prec();
    let zero = Float::new(prec);
    let fma_fi = |acc: &mut Float, v: &Float, k: &Integer| *acc += Float::with_val(prec, v * k);
    let fma_if = |acc: &mut Float, k: &Integer, v: &Float| *acc += Float::with_val(prec, v * k);
    match parent.orientation {
        Orientation::Columns => {
            let row = Matrix::from_rows(vec![parent.y.clone()]);
            parent.y = par_matmul(exec, &row, &bbar, &zero, fma_fi)?
                .into_rows()
                .remove(0);
            parent.b = int_matmul(exec, &parent.b, &bbar)?;
        }
        Orientation::Rows => {
            let col = Matrix::from_fn(n, 1, |i, _| parent.y[i].clone());
            let out = par_matmul(exec, &bbar, &col, &zero, fma_if)?;
            parent.y = out.column(0);
            parent.b = int_matmul(exec, &bbar, &parent.b)?;
        }
    }
    if let Some(a) = &parent.a {
        parent.a = Some(int_matmul(exec, &abar, a)?);
    }
    parent.h = par_matmul(exec, &abar, &parent.h, &zero, fma_if)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BatchEnd {
    Flush,
    Abandoned,
    Budget,
}

const FULL: usize = 0;
const INTERMEDIATE: usize = 1;
const DOUBLE: usize = 2;
const LEVEL_NAMES: [&str; 3] = ["full", "intermediate", "double"];

struct Runner<'a> {
    algo: Algorithm,
    beta: f64,
    gamma: Float,
    cfg: LevelConfig,
    max_iters: u64,
    total: u64,
    counts: [LevelCount; 3],
    best_bound: Float,
    full: Core<Float, Integer>,
    guard: CycleGuard<Float>,
    single_next: bool,
    exec: Executor,
    observer: &'a mut dyn Observer,
}

impl Runner<'_> {
    fn note_bound(&mut self) {
        if let Some(b) = self.full.norm_bound() {
            if b > self.best_bound {
                self.best_bound = b;
            }
        }
    }

    fn log<R: Real, I: Entry<R>>(
        &mut self,
        level: usize,
        core: &Core<R, I>,
        scale_log10: f64,
        pairs: usize,
    ) {
        let (_, min, max) = core.y_extremes();
        let rec = crate::pslq::IterRecord {
            iter: self.total,
            level: LEVEL_NAMES[level],
            min_y_exp: min.log10_abs() + scale_log10,
            max_y_exp: max.log10_abs() + scale_log10,
            bound: self.best_bound.to_f64(),
            pairs,
        };
        self.observer.on_iteration(&rec);
    }

    /// One iteration at full precision.
    fn full_step(&mut self) -> Result<()> {
        let pairs = algo_step(
            &mut self.full,
            self.algo,
            self.beta,
            &mut self.guard,
            &mut self.single_next,
            &self.exec,
        )?;
        self.total += 1;
        self.counts[FULL].iterations += 1;
        self.note_bound();
        let (_, min, max) = self.full.y_extremes();
        let rec = record_of(self.total, "full", &min, &max, &self.best_bound, pairs);
        self.observer.on_iteration(&rec);
        Ok(())
    }

    fn shadow_step<R: Real, I: Entry<R>>(
        &mut self,
        shadow: &mut ShadowState<R, I>,
        limits: &TierLimits,
        level: usize,
    ) -> ShadowSignal {
        let sig = shadow_iterate(shadow, self.algo, self.beta, limits);
        if sig != ShadowSignal::Abandon {
            self.total += 1;
            self.counts[level].iterations += 1;
            self.log(level, &shadow.core, shadow.y_scale_log10, shadow.last_pairs);
        }
        sig
    }

    /// Iterates a leaf shadow until a flush is due.
    fn leaf_batch<R: Real, I: Entry<R>>(
        &mut self,
        shadow: &mut ShadowState<R, I>,
        limits: &TierLimits,
        level: usize,
    ) -> BatchEnd {
        loop {
            if self.total >= self.max_iters {
                return BatchEnd::Budget;
            }
            match self.shadow_step(shadow, limits, level) {
                ShadowSignal::Continue => {}
                ShadowSignal::FlushNeeded(_) => return BatchEnd::Flush,
                ShadowSignal::Abandon => return BatchEnd::Abandoned,
            }
        }
    }

    /// Drives an intermediate shadow with double shadows nested inside it.
    fn intermediate_batch(&mut self, inter: &mut ShadowState<Float, Integer>) -> BatchEnd {
        let limits = self.cfg.intermediate;
        let dlimits = self.cfg.double;
        loop {
            if self.total >= self.max_iters {
                return BatchEnd::Budget;
            }
            let mut step_here = true;
            let spawned: Result<ShadowState<f64, f64>> = spawn_shadow(
                &inter.core,
                Tier::Double,
                &dlimits,
                &self.gamma,
                (),
                inter.y_scale_log10,
            );
            if let Ok(mut d) = spawned {
                let end = self.leaf_batch(&mut d, &dlimits, DOUBLE);
                if d.iterations > 0 {
                    let seq = Executor::sequential();
                    let mut merged = inter.core.clone();
                    if flush_updates(&mut merged, &d, &seq).is_ok()
                        && lq_in_place(&mut merged.h).is_ok()
                    {
                        inter.core = merged;
                        inter.saved_prev = None;
                        self.counts[DOUBLE].flushes += 1;
                        step_here = end == BatchEnd::Abandoned;
                    } else {
                        self.total -= d.iterations;
                        self.counts[DOUBLE].iterations -= d.iterations;
                    }
                }
                if end == BatchEnd::Budget {
                    return BatchEnd::Budget;
                }
            }
            if flush_reason(&inter.core, &limits, exact_bits(inter.tier)).is_some() {
                return BatchEnd::Flush;
            }
            if step_here {
                match self.shadow_step(inter, &limits, INTERMEDIATE) {
                    ShadowSignal::Continue => {}
                    ShadowSignal::FlushNeeded(_) => return BatchEnd::Flush,
                    ShadowSignal::Abandon => return BatchEnd::Abandoned,
                }
            }
        }
    }

    /// Merges a finished shadow into the full state. On an inexact shadow
    /// the full state is left untouched and the shadow's iterations are
    /// discarded.
    fn merge_into_full<R: Real, I: Entry<R>>(
        &mut self,
        shadow: &ShadowState<R, I>,
        level: usize,
    ) -> Result<bool> {
        let mut merged = self.full.clone();
        match flush_updates(&mut merged, shadow, &self.exec) {
            Ok(()) => {}
            Err(Error::InexactShadow(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
        lq_in_place(&mut merged.h)?;
        self.full = merged;
        self.counts[level].flushes += 1;
        self.note_bound();
        self.observer.on_flush(LEVEL_NAMES[level], &self.full);
        Ok(true)
    }

    /// One spawn/iterate/flush cycle against the full state.
    fn cycle(&mut self) -> Result<()> {
        let mut full_step = true;
        if self.cfg.levels == 2 {
            let lim = self.cfg.double;
            let spawned: Result<ShadowState<f64, f64>> =
                spawn_shadow(&self.full, Tier::Double, &lim, &self.gamma, (), 0.0);
            if let Ok(mut d) = spawned {
                let end = self.leaf_batch(&mut d, &lim, DOUBLE);
                if d.iterations > 0 {
                    let iters_before = self.total;
                    if self.merge_into_full(&d, DOUBLE)? {
                        full_step = end == BatchEnd::Abandoned;
                    } else {
                        self.total = iters_before - d.iterations;
                        self.counts[DOUBLE].iterations -= d.iterations;
                    }
                }
                if end == BatchEnd::Budget {
                    return Ok(());
                }
            }
        } else {
            let lim = self.cfg.intermediate;
            let prec = bits_for_digits(self.cfg.intermediate_digits);
            let tier = Tier::Intermediate(self.cfg.intermediate_digits);
            let spawned: Result<ShadowState<Float, Integer>> =
                spawn_shadow(&self.full, tier, &lim, &self.gamma, prec, 0.0);
            if let Ok(mut inter) = spawned {
                let before = (self.total, self.counts.clone());
                let end = self.intermediate_batch(&mut inter);
                if self.total > before.0 {
                    if self.merge_into_full(&inter, INTERMEDIATE)? {
                        full_step = end == BatchEnd::Abandoned;
                    } else {
                        let flushes = self.counts[INTERMEDIATE].flushes;
                        self.total = before.0;
                        self.counts = before.1;
                        self.counts[INTERMEDIATE].flushes = flushes;
                    }
                }
                if end == BatchEnd::Budget {
                    return Ok(());
                }
            }
        }
        if full_step && self.total < self.max_iters {
            self.full_step()?;
        }
        Ok(())
    }

    fn outcome(&self, status: Status) -> RelationOutcome {
        RelationOutcome {
            status,
            coefficients: None,
            norm_bound: self.best_bound.clone(),
            confidence: None,
            iterations: self.total,
            levels: self.level_counts(),
        }
    }

    fn level_counts(&self) -> Vec<LevelCount> {
        match self.cfg.levels {
            2 => vec![self.counts[FULL].clone(), self.counts[DOUBLE].clone()],
            _ => self.counts.to_vec(),
        }
    }

    fn run(mut self, thresholds: &Thresholds) -> RelationOutcome {
        loop {
            match thresholds.test(&self.full) {
                Some(Verdict::Found { index, confidence }) => {
                    return found_outcome(
                        &self.full,
                        index,
                        confidence,
                        self.best_bound.clone(),
                        self.total,
                        self.level_counts(),
                    );
                }
                Some(Verdict::Exhausted) => return self.outcome(Status::PrecisionExhausted),
                None => {}
            }
            if self.total >= self.max_iters {
                return self.outcome(Status::IterationLimit);
            }
            if self.cycle().is_err() {
                return self.outcome(Status::PrecisionExhausted);
            }
        }
    }
}

/// Runs a relation search on `x` with `levels.levels` arithmetic levels.
pub fn run_multilevel(
    x: &[Float],
    algo: Algorithm,
    precision: &PrecisionConfig,
    levels: &LevelConfig,
    exec: Executor,
    observer: &mut dyn Observer,
) -> Result<RelationOutcome> {
    levels.validate(precision.digits())?;
    if precision.max_iters == 0 {
        return Err(Error::InvalidParameter(
            "max_iters must be at least 1".into(),
        ));
    }
    let gamma = precision.gamma_value()?;
    let policy = precision.policy;
    let (core, best_bound) = match algo {
        Algorithm::Pslq => {
            let st = init_state(x, &gamma, policy)?.with_executor(exec.clone());
            if levels.levels == 1 {
                let mut st = st;
                return Ok(run(&mut st, precision.max_iters, observer));
            }
            (st.core, st.best_bound)
        }
        Algorithm::MultiPair => {
            let st = mp_init_state(x, &gamma, precision.beta, policy)?.with_executor(exec.clone());
            if levels.levels == 1 {
                let mut st = st;
                return Ok(mp_run(&mut st, precision.max_iters, observer));
            }
            (st.core, st.best_bound)
        }
    };
    let mut core = core;
    if levels.omit_full_a {
        core.a = None;
    }
    let mut counts: [LevelCount; 3] = Default::default();
    for (c, name) in counts.iter_mut().zip(LEVEL_NAMES) {
        c.level = name.to_string();
    }
    let runner = Runner {
        algo,
        beta: precision.beta,
        gamma,
        cfg: *levels,
        max_iters: precision.max_iters,
        total: 0,
        counts,
        best_bound,
        full: core,
        guard: CycleGuard::new(),
        single_next: false,
        exec,
        observer,
    };
    Ok(runner.run(&Thresholds::new(&policy)))
}

impl<R: Real, I: Entry<R>> ShadowState<R, I> {
    /// Largest `|Ā|`/`|B̄|` entry.
    pub fn max_entry(&self) -> I {
        self.core.max_entry()
    }

    pub fn is_exact(&self) -> bool {
        shadow_sound(&self.core, exact_bits(self.tier))
    }
}
