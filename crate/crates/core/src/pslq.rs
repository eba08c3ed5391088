//! Standard one-level PSLQ at full working precision.

use std::cmp::Ordering;

use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Core, Orientation};
use crate::parallel::Executor;
use crate::precision::{bits_for_digits, EpsilonPolicy, Real};

/// `sqrt(4/3)` at `bits` binary digits.
pub fn default_gamma(bits: u32) -> Float {
    (Float::with_val(bits, 4) / Float::with_val(bits, 3)).sqrt()
}

/// Smallest admissible `gamma`, `sqrt(4/3)`, with a little slack for rounding.
pub(crate) fn check_gamma(gamma: &Float) -> Result<()> {
    let min = default_gamma(gamma.prec());
    let slack = Float::with_val(gamma.prec(), 1) - Float::with_val(gamma.prec(), 1e-30);
    if *gamma < min * slack {
        return Err(Error::InvalidParameter(format!(
            "gamma must be at least sqrt(4/3), got {}",
            gamma.to_f64()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Found,
    PrecisionExhausted,
    IterationLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Found => "found",
            Status::PrecisionExhausted => "precision_exhausted",
            Status::IterationLimit => "iteration_limit",
        }
    }
}

/// Iteration and flush counts for one arithmetic level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LevelCount {
    pub level: String,
    pub iterations: u64,
    pub flushes: u64,
}

#[derive(Clone, Debug)]
pub struct RelationOutcome {
    pub status: Status,
    /// Present iff `status == Found`; first nonzero entry positive.
    pub coefficients: Option<Vec<Integer>>,
    pub norm_bound: Float,
    /// `min|y| / max|y|` at detection.
    pub confidence: Option<Float>,
    pub iterations: u64,
    pub levels: Vec<LevelCount>,
}

/// One line of the iteration log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: u64,
    pub level: &'static str,
    pub min_y_exp: f64,
    pub max_y_exp: f64,
    pub bound: f64,
    pub pairs: usize,
}

pub trait Observer {
    fn on_iteration(&mut self, record: &IterRecord);

    /// Called with the full-precision state after each flush into it.
    fn on_flush(&mut self, _level: &'static str, _core: &Core<Float, Integer>) {}
}

/// Discards every record.
pub struct Silent;

impl Observer for Silent {
    fn on_iteration(&mut self, _: &IterRecord) {}
}

impl<F: FnMut(&IterRecord)> Observer for F {
    fn on_iteration(&mut self, record: &IterRecord) {
        self(record)
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub pivots: Vec<usize>,
    pub min_y: Float,
    pub max_y: Float,
    pub bound: Option<Float>,
}

/// Negates `v` if its first nonzero entry is negative.
pub fn normalize_sign(mut v: Vec<Integer>) -> Vec<Integer> {
    if let Some(first) = v.iter().find(|c| c.cmp0() != Ordering::Equal) {
        if first.cmp0() == Ordering::Less {
            for c in v.iter_mut() {
                *c = -c.clone();
            }
        }
    }
    v
}

pub(crate) enum Verdict {
    Found { index: usize, confidence: Float },
    Exhausted,
}

/// Termination thresholds at full precision.
#[derive(Clone, Debug)]
pub(crate) struct Thresholds {
    detect: Float,
    exhaust: Float,
    a_limit: Integer,
}

impl Thresholds {
    pub(crate) fn new(policy: &EpsilonPolicy) -> Self {
        Self {
            detect: policy.detection_threshold(),
            exhaust: policy.exhaustion_level(),
            a_limit: policy.entry_limit(),
        }
    }

    pub(crate) fn test(&self, core: &Core<Float, Integer>) -> Option<Verdict> {
        let (imin, min, max) = core.y_extremes();
        if min < self.detect {
            let confidence = Float::with_val(min.prec(), &min / &max);
            return Some(Verdict::Found {
                index: imin,
                confidence,
            });
        }
        if let Some(amax) = core.max_a_entry() {
            if amax.cmp_abs(&self.a_limit) == Ordering::Greater {
                return Some(Verdict::Exhausted);
            }
        }
        if min < self.exhaust {
            return Some(Verdict::Exhausted);
        }
        None
    }
}

/// Full-precision state of one relation search with the standard algorithm.
#[derive(Clone, Debug)]
pub struct RelationState {
    pub core: Core<Float, Integer>,
    pub gamma: Float,
    pub policy: EpsilonPolicy,
    pub iter_count: u64,
    pub best_bound: Float,
    thresholds: Thresholds,
    exec: Executor,
}

impl RelationState {
    pub fn n(&self) -> usize {
        self.core.n
    }

    pub fn with_executor(mut self, exec: Executor) -> Self {
        self.exec = exec;
        self
    }

    /// Records `bound` into the running maximum.
    fn record_bound(&mut self, bound: Option<&Float>) {
        if let Some(b) = bound {
            if *b > self.best_bound {
                self.best_bound = b.clone();
            }
        }
    }
}

/// Rounds every input to the working precision of `policy`.
pub fn to_working(x: &[Float], policy: &EpsilonPolicy) -> Vec<Float> {
    let bits = bits_for_digits(policy.work_digits);
    x.iter().map(|v| Float::with_val(bits, v)).collect()
}

/// Initial state: identity `A`, `B`; normalized `y`; `H` built and
/// Hermite-reduced.
pub fn init_state(x: &[Float], gamma: &Float, policy: EpsilonPolicy) -> Result<RelationState> {
    let bits = policy.bits();
    let gamma = Float::with_val(bits, gamma);
    check_gamma(&gamma)?;
    let x = to_working(x, &policy);
    let mut core = Core::new(&x, &gamma, Orientation::Columns, true)?;
    core.hermite_reduce()?;
    let best_bound = core.norm_bound().unwrap_or_else(|| Float::new(bits));
    Ok(RelationState {
        core,
        gamma,
        policy,
        iter_count: 0,
        best_bound,
        thresholds: Thresholds::new(&policy),
        exec: Executor::sequential(),
    })
}

/// Applies one iteration: pivot, exchange, corner removal, partial reduction,
/// norm bound.
pub fn iterate_once(state: &mut RelationState) -> Result<StepReport> {
    let m = state.core.pslq_step(&state.exec)?;
    state.iter_count += 1;
    let bound = state.core.norm_bound();
    state.record_bound(bound.as_ref());
    let (_, min_y, max_y) = state.core.y_extremes();
    Ok(StepReport {
        pivots: vec![m],
        min_y,
        max_y,
        bound,
    })
}

/// Current norm bound `1 / max_j |H_jj|`.
pub fn norm_bound(state: &RelationState) -> Result<Float> {
    state
        .core
        .norm_bound()
        .ok_or_else(|| Error::Exhausted("zero diagonal in H".to_string()))
}

pub(crate) fn found_outcome(
    core: &Core<Float, Integer>,
    index: usize,
    confidence: Float,
    norm_bound: Float,
    iterations: u64,
    levels: Vec<LevelCount>,
) -> RelationOutcome {
    RelationOutcome {
        status: Status::Found,
        coefficients: Some(normalize_sign(core.relation(index))),
        norm_bound,
        confidence: Some(confidence),
        iterations,
        levels,
    }
}

pub(crate) fn record_of(
    iter: u64,
    level: &'static str,
    min: &Float,
    max: &Float,
    bound: &Float,
    pairs: usize,
) -> IterRecord {
    IterRecord {
        iter,
        level,
        min_y_exp: min.log10_abs(),
        max_y_exp: max.log10_abs(),
        bound: bound.to_f64(),
        pairs,
    }
}

/// Iterates until a relation is detected, precision runs out, or
/// `max_iters` iterations have been applied.
pub fn run(
    state: &mut RelationState,
    max_iters: u64,
    observer: &mut dyn Observer,
) -> RelationOutcome {
    loop {
        let outcome = |state: &RelationState, status| RelationOutcome {
            status,
            coefficients: None,
            norm_bound: state.best_bound.clone(),
            confidence: None,
            iterations: state.iter_count,
            levels: vec![LevelCount {
                level: "full".into(),
                iterations: state.iter_count,
                flushes: 0,
            }],
        };
        match state.thresholds.test(&state.core) {
            Some(Verdict::Found { index, confidence }) => {
                let levels = outcome(state, Status::Found).levels;
                return found_outcome(
                    &state.core,
                    index,
                    confidence,
                    state.best_bound.clone(),
                    state.iter_count,
                    levels,
                );
            }
            Some(Verdict::Exhausted) => return outcome(state, Status::PrecisionExhausted),
            None => {}
        }
        if state.iter_count >= max_iters {
            return outcome(state, Status::IterationLimit);
        }
        match iterate_once(state) {
            Ok(report) => observer.on_iteration(&record_of(
                state.iter_count,
                "full",
                &report.min_y,
                &report.max_y,
                &state.best_bound,
                1,
            )),
            Err(_) => return outcome(state, Status::PrecisionExhausted),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::precision::pow10;
    use rand::{Rng, SeedableRng};

    fn fl(v: f64, digits: u32) -> Float {
        Float::with_val(bits_for_digits(digits), v)
    }

    fn golden(digits: u32) -> Float {
        let b = bits_for_digits(digits);
        (Float::with_val(b, 5).sqrt() + 1u32) / 2u32
    }

    #[test]
    fn init_on_unit_pair() {
        let policy = EpsilonPolicy::with_digits(50).unwrap();
        let bits = policy.bits();
        let x = [fl(1.0, 50), fl(1.0, 50)];
        // pre-reduction H is (1/sqrt2, -1/sqrt2)
        let raw: Core<Float, Integer> =
            Core::new(&x, &default_gamma(bits), Orientation::Columns, true).unwrap();
        let r = Float::with_val(bits, 0.5).sqrt();
        assert!(Float::with_val(bits, &raw.h[(0, 0)] - &r).abs() < pow10(-45, 50));
        assert!(Float::with_val(bits, &raw.h[(1, 0)] + &r).abs() < pow10(-45, 50));

        let st = init_state(&x, &default_gamma(bits), policy).unwrap();
        let m = norm_bound(&st).unwrap();
        let sqrt2 = Float::with_val(bits, 2).sqrt();
        assert!(Float::with_val(bits, &m - &sqrt2).abs() < pow10(-45, 50));
        assert!(is_identity(&int_product(
            st.core.a.as_ref().unwrap(),
            &st.core.b
        )));
    }

    #[test]
    fn init_reduces_subdiagonal() {
        let policy = EpsilonPolicy::with_digits(50).unwrap();
        let x = [fl(1.0, 50), fl(0.5, 50), fl(0.3, 50), fl(0.77, 50)];
        let st = init_state(&x, &default_gamma(policy.bits()), policy).unwrap();
        let h = &st.core.h;
        for i in 0..4 {
            for j in 0..i.min(3) {
                let half = Float::with_val(policy.bits(), h[(j, j)].clone().abs() / 2u32);
                assert!(h[(i, j)].clone().abs() <= half + pow10(-45, 50));
            }
        }
        assert!(is_identity(&int_product(
            st.core.a.as_ref().unwrap(),
            &st.core.b
        )));
    }

    #[test]
    fn unit_pair_relation() {
        let policy = EpsilonPolicy::with_digits(50).unwrap();
        let x = [fl(1.0, 50), fl(1.0, 50)];
        let mut st = init_state(&x, &default_gamma(policy.bits()), policy).unwrap();
        let out = run(&mut st, 10, &mut Silent);
        assert_eq!(out.status, Status::Found);
        assert!(out.iterations <= 1);
        assert_eq!(
            out.coefficients.unwrap(),
            vec![Integer::from(1), Integer::from(-1)]
        );
    }

    #[test]
    fn golden_ratio_powers() {
        let policy = EpsilonPolicy::with_digits(50).unwrap();
        let phi = golden(50);
        let x = [
            fl(1.0, 50),
            phi.clone(),
            Float::with_val(phi.prec(), &phi * &phi),
        ];
        let mut st = init_state(&x, &default_gamma(policy.bits()), policy).unwrap();
        let out = run(&mut st, 100, &mut Silent);
        assert_eq!(out.status, Status::Found);
        assert_eq!(
            out.coefficients.unwrap(),
            vec![Integer::from(1), Integer::from(1), Integer::from(-1)]
        );
    }

    #[test]
    fn invariants_hold_each_iteration() {
        let digits = 60;
        let policy = EpsilonPolicy::with_digits(digits).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let bits = policy.bits();
        for _ in 0..5 {
            let x: Vec<Float> = (0..5)
                .map(|_| {
                    // 60 random digits per entry
                    let num = Integer::from_str_radix(
                        &(0..60)
                            .map(|_| char::from(b'0' + rng.gen_range(0..10)))
                            .collect::<String>(),
                        10,
                    )
                    .unwrap();
                    Float::with_val(bits, num) / pow10(60, digits) + 0.01
                })
                .collect();
            let xhat = normalized(&to_working(&x, &policy));
            let mut st = init_state(&x, &default_gamma(bits), policy).unwrap();
            for _ in 0..30 {
                if iterate_once(&mut st).is_err() {
                    break;
                }
                assert!(lower_trapezoidal(&st.core));
                assert!(is_identity(&int_product(
                    st.core.a.as_ref().unwrap(),
                    &st.core.b
                )));
                assert!(y_residual_log10(&st.core, &xhat) < 5.0 - digits as f64);
                let (_, min, _) = st.core.y_extremes();
                if min < pow10(20 - digits as i32, digits) {
                    break;
                }
            }
        }
    }

    #[test]
    fn iteration_limit_reports_bound() {
        let digits = 80;
        let policy = EpsilonPolicy::with_digits(digits).unwrap();
        let bits = policy.bits();
        let x = [
            Float::with_val(bits, 2).sqrt(),
            Float::with_val(bits, 3).sqrt(),
            Float::with_val(bits, 5).sqrt(),
            Float::with_val(bits, 7).ln(),
        ];
        let mut st = init_state(&x, &default_gamma(bits), policy).unwrap();
        let mut bounds = Vec::new();
        let mut obs = |r: &IterRecord| bounds.push(r.bound);
        let out = run(&mut st, 5, &mut obs);
        assert_eq!(out.status, Status::IterationLimit);
        assert_eq!(out.iterations, 5);
        assert!(out.coefficients.is_none() && out.confidence.is_none());
        assert!(bounds.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out.norm_bound, st.best_bound);
    }

    #[test]
    fn rejects_small_gamma_and_zero_entries() {
        let policy = EpsilonPolicy::with_digits(40).unwrap();
        let x = [fl(1.0, 40), fl(2.0, 40)];
        assert!(matches!(
            init_state(&x, &fl(1.1, 40), policy),
            Err(Error::InvalidParameter(_))
        ));
        let x = [fl(1.0, 40), fl(0.0, 40)];
        assert!(matches!(
            init_state(&x, &default_gamma(policy.bits()), policy),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn sign_normalization() {
        let v = normalize_sign(vec![Integer::from(0), Integer::from(-2), Integer::from(3)]);
        assert_eq!(
            v,
            vec![Integer::from(0), Integer::from(2), Integer::from(-3)]
        );
    }
}
