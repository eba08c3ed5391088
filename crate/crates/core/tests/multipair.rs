use pslq::cli::{build_vector, ProblemSpec, Source};
use pslq::multipair::{mp_init_state, mp_run, DEFAULT_BETA};
use pslq::precision::EpsilonPolicy;
use pslq::pslq::{default_gamma, Silent};
use pslq::Status;

#[test]
fn cycle_guard_stays_quiet_on_large_problem() {
    // n = 26: repeats of y are not expected for n > 20
    let digits = 180;
    let x = build_vector(&ProblemSpec {
        source: Source::Algebraic(5, 5),
        digits,
    })
    .unwrap();
    let policy = EpsilonPolicy::with_digits(digits).unwrap();
    let mut st = mp_init_state(&x, &default_gamma(policy.bits()), DEFAULT_BETA, policy).unwrap();
    let out = mp_run(&mut st, 10_000, &mut Silent);
    assert_eq!(out.status, Status::Found);
    assert_eq!(st.guard.hits, 0);
}
