//! Multi-pair PSLQ: up to `beta·n` disjoint exchanges per iteration.

use std::collections::VecDeque;

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::kernel::{Core, Orientation};
use crate::parallel::Executor;
use crate::precision::{EpsilonPolicy, Real};
use crate::pslq::{
    default_gamma, found_outcome, record_of, to_working, LevelCount, Observer, RelationOutcome,
    Status, StepReport, Thresholds, Verdict,
};

pub const DEFAULT_BETA: f64 = 0.4;

/// Number of previous `y` vectors kept by the cycle guard.
pub const HISTORY: usize = 8;

/// Ring of recent `y` vectors; a repeat forces a single-pair iteration.
#[derive(Clone, Debug, Default)]
pub struct CycleGuard<R> {
    history: VecDeque<Vec<R>>,
    pub hits: u64,
}

impl<R: Real> CycleGuard<R> {
    pub fn new() -> Self {
        Self {
            history: VecDeque::with_capacity(HISTORY),
            hits: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// True iff `y` bit-equals one of the stored vectors. `y` is then
    /// remembered, evicting the oldest entry beyond eight.
    pub fn observe(&mut self, y: &[R]) -> bool {
        let repeat = self
            .history
            .iter()
            .any(|old| old.iter().zip(y).all(|(a, b)| a.bit_eq(b)));
        if repeat {
            self.hits += 1;
        }
        if self.history.len() == HISTORY {
            self.history.pop_front();
        }
        self.history.push_back(y.to_vec());
        repeat
    }

    pub fn clear(&mut self) {
        self.history.clear();
    }
}

#[derive(Clone, Debug)]
pub struct MultiPairState {
    pub core: Core<Float, Integer>,
    pub gamma: Float,
    pub beta: f64,
    pub policy: EpsilonPolicy,
    pub iter_count: u64,
    pub best_bound: Float,
    pub guard: CycleGuard<Float>,
    /// Set by the cycle guard: the next iteration selects one pair only.
    pub single_next: bool,
    thresholds: Thresholds,
    exec: Executor,
}

impl MultiPairState {
    pub fn with_executor(mut self, exec: Executor) -> Self {
        self.exec = exec;
        self
    }

    pub fn executor(&self) -> &Executor {
        &self.exec
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    Ok(())
}

/// Same as the standard initialization but without the reduction pass and
/// with `B` transposed.
pub fn mp_init_state(
    x: &[Float],
    gamma: &Float,
    beta: f64,
    policy: EpsilonPolicy,
) -> Result<MultiPairState> {
    check_beta(beta)?;
    let bits = policy.bits();
    let gamma = Float::with_val(bits, gamma);
    if gamma < default_gamma(bits) * Float::with_val(bits, 0.999_999_999_999) {
        return Err(Error::InvalidParameter(
            "gamma must be at least sqrt(4/3)".to_string(),
        ));
    }
    let x = to_working(x, &policy);
    let core = Core::new(&x, &gamma, Orientation::Rows, true)?;
    let best_bound = core.norm_bound().unwrap_or_else(|| Float::new(bits));
    Ok(MultiPairState {
        core,
        gamma,
        beta,
        policy,
        iter_count: 0,
        best_bound,
        guard: CycleGuard::new(),
        single_next: false,
        thresholds: Thresholds::new(&policy),
        exec: Executor::sequential(),
    })
}

/// One multi-pair iteration followed by the cycle check.
pub fn mp_iterate_once(state: &mut MultiPairState) -> Result<StepReport> {
    let max_pairs = state.single_next.then_some(1);
    let pivots = state
        .core
        .multipair_step(state.beta, max_pairs, &state.exec)?;
    state.iter_count += 1;
    state.single_next = cycle_guard(state);
    let bound = state.core.norm_bound();
    if let Some(b) = &bound {
        if *b > state.best_bound {
            state.best_bound = b.clone();
        }
    }
    let (_, min_y, max_y) = state.core.y_extremes();
    Ok(StepReport {
        pivots,
        min_y,
        max_y,
        bound,
    })
}

/// True iff the current `y` repeats one of the last eight.
pub fn cycle_guard(state: &mut MultiPairState) -> bool {
    state.guard.observe(&state.core.y)
}

pub fn mp_run(
    state: &mut MultiPairState,
    max_iters: u64,
    observer: &mut dyn Observer,
) -> RelationOutcome {
    let outcome = |state: &MultiPairState, status| RelationOutcome {
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
    loop {
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
        match mp_iterate_once(state) {
            Ok(report) => observer.on_iteration(&record_of(
                state.iter_count,
                "full",
                &report.min_y,
                &report.max_y,
                &state.best_bound,
                report.pivots.len(),
            )),
            Err(_) => return outcome(state, Status::PrecisionExhausted),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::precision::{bits_for_digits, pow10};
    use crate::pslq::testutil::*;
    use crate::pslq::{init_state, iterate_once, Silent};
    use rand::{Rng, SeedableRng};

    fn random_vector(rng: &mut impl Rng, n: usize, digits: u32) -> Vec<Float> {
        let bits = bits_for_digits(digits);
        (0..n)
            .map(|_| {
                let s: String = (0..digits)
                    .map(|_| char::from(b'0' + rng.gen_range(0..10)))
                    .collect();
                Float::with_val(bits, Integer::from_str_radix(&s, 10).unwrap())
                    / pow10(digits as i32, digits)
                    + 0.05
            })
            .collect()
    }

    #[test]
    fn init_matches_unreduced_standard_init() {
        let policy = EpsilonPolicy::with_digits(40).unwrap();
        let bits = policy.bits();
        let x = [Float::with_val(bits, 1), Float::with_val(bits, 1)];
        let st = mp_init_state(&x, &default_gamma(bits), DEFAULT_BETA, policy).unwrap();
        let raw: Core<Float, Integer> =
            Core::new(&x, &default_gamma(bits), Orientation::Columns, true).unwrap();
        assert_eq!(st.core.h, raw.h);
        assert!(is_identity(st.core.a.as_ref().unwrap()));
        assert!(is_identity(&st.core.b));
        assert_eq!(st.core.y, raw.y);
    }

    #[test]
    fn cycle_guard_detects_repeats() {
        let mut g: CycleGuard<f64> = CycleGuard::new();
        assert!(!g.observe(&[1.0, 2.0]));
        assert!(!g.observe(&[1.5, 2.0]));
        assert!(g.observe(&[1.0, 2.0]));
        for i in 0..20 {
            g.observe(&[i as f64, 0.0]);
        }
        assert_eq!(g.len(), HISTORY);
        assert!(!g.observe(&[1.0, 2.0]));
        assert_eq!(g.hits, 1);
    }

    #[test]
    fn invariants_hold_each_iteration() {
        let digits = 60;
        let policy = EpsilonPolicy::with_digits(digits).unwrap();
        let bits = policy.bits();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [4, 6, 8] {
            let x = random_vector(&mut rng, n, digits);
            let xhat = normalized(&to_working(&x, &policy));
            let mut st = mp_init_state(&x, &default_gamma(bits), DEFAULT_BETA, policy).unwrap();
            for _ in 0..25 {
                let rep = mp_iterate_once(&mut st).unwrap();
                assert!(!rep.pivots.is_empty());
                let a = st.core.a.as_ref().unwrap();
                assert!(is_identity(&int_product(a, &st.core.b.transpose())));
                assert!(y_residual_log10(&st.core, &xhat) < 5.0 - digits as f64);
                assert!(lower_trapezoidal(&st.core));
                // reduction postcondition
                for l in 0..n {
                    for j in 0..l.min(n - 1) {
                        let half = Float::with_val(bits, st.core.h[(j, j)].clone().abs() / 2u32);
                        assert!(
                            st.core.h[(l, j)].clone().abs()
                                <= half + pow10(5 - digits as i32, digits)
                        );
                    }
                }
                if rep.min_y < pow10(20 - digits as i32, digits) {
                    break;
                }
            }
        }
    }

    #[test]
    fn single_pair_mode_tracks_standard_pslq() {
        let digits = 50;
        let policy = EpsilonPolicy::with_digits(digits).unwrap();
        let bits = policy.bits();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 3..=6 {
            let x = random_vector(&mut rng, n, digits);
            let mut std_state = init_state(&x, &default_gamma(bits), policy).unwrap();
            let mut mp_core = std_state.core.clone();
            mp_core.orientation = Orientation::Rows;
            mp_core.b = mp_core.b.transpose();
            let exec = Executor::sequential();
            for _ in 0..40 {
                let (_, min, _) = std_state.core.y_extremes();
                if min < pow10(25 - digits as i32, digits) {
                    break;
                }
                let rep = iterate_once(&mut std_state).unwrap();
                let piv = mp_core
                    .multipair_step(DEFAULT_BETA, Some(1), &exec)
                    .unwrap();
                assert_eq!(piv, rep.pivots);
                for (a, b) in std_state.core.y.iter().zip(&mp_core.y) {
                    let d = Float::with_val(bits, a - b).abs();
                    assert!(d < pow10(8 - digits as i32, digits));
                }
                assert_eq!(std_state.core.a, mp_core.a);
                assert_eq!(std_state.core.b, mp_core.b.transpose());
            }
        }
    }

    #[test]
    fn golden_ratio_relation_from_a_row() {
        let digits = 50;
        let policy = EpsilonPolicy::with_digits(digits).unwrap();
        let bits = policy.bits();
        let phi = (Float::with_val(bits, 5).sqrt() + 1u32) / 2u32;
        let x = [
            Float::with_val(bits, 1),
            phi.clone(),
            Float::with_val(bits, &phi * &phi),
        ];
        let mut st = mp_init_state(&x, &default_gamma(bits), DEFAULT_BETA, policy).unwrap();
        let out = mp_run(&mut st, 100, &mut Silent);
        assert_eq!(out.status, Status::Found);
        assert_eq!(
            out.coefficients.unwrap(),
            vec![Integer::from(1), Integer::from(1), Integer::from(-1)]
        );
    }

    #[test]
    fn parallel_steps_are_bitwise_serial() {
        let digits = 80;
        let policy = EpsilonPolicy::with_digits(digits).unwrap();
        let bits = policy.bits();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let x = random_vector(&mut rng, 12, digits);
        let run_with = |w: usize| {
            let mut st = mp_init_state(&x, &default_gamma(bits), DEFAULT_BETA, policy)
                .unwrap()
                .with_executor(Executor::new(w).unwrap());
            let mut trace: Vec<(Vec<Float>, Matrix<Float>, Matrix<Integer>)> = Vec::new();
            for _ in 0..15 {
                mp_iterate_once(&mut st).unwrap();
                trace.push((st.core.y.clone(), st.core.h.clone(), st.core.b.clone()));
            }
            (trace, st.core.a.clone())
        };
        let serial = run_with(1);
        for w in [2, 4] {
            assert_eq!(run_with(w), serial);
        }
    }

    #[test]
    fn beta_validation() {
        let policy = EpsilonPolicy::with_digits(40).unwrap();
        let bits = policy.bits();
        let x = [Float::with_val(bits, 1), Float::with_val(bits, 3).sqrt()];
        assert!(mp_init_state(&x, &default_gamma(bits), 0.0, policy).is_err());
        assert!(mp_init_state(&x, &default_gamma(bits), 1.5, policy).is_err());
    }
}
