//! High-precision generators for the input constants.
//!
//! Every generator takes a target digit count, works with ten extra guard
//! digits, and returns a value rounded to the target precision.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::precision::{bits_for_digits, parse_decimal};

pub const GUARD_DIGITS: u32 = 10;
const MIN_DIGITS: u32 = 32;

fn check_digits(digits: u32) -> Result<()> {
    if digits < MIN_DIGITS {
        return Err(Error::InvalidParameter(format!(
            "generators need at least {MIN_DIGITS} digits, got {digits}"
        )));
    }
    Ok(())
}

fn work_bits(digits: u32) -> u32 {
    bits_for_digits(digits + GUARD_DIGITS)
}

fn finish(v: Float, digits: u32) -> Float {
    Float::with_val(bits_for_digits(digits), v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Pi,
    Zeta(u32),
    /// `sum_{n>=1} (±1)^(n-1) / (n^k C(2n,n))`
    CentralBinom {
        k: u32,
        alternating: bool,
    },
    /// `sum_{k>=0} 1 / (base^k (modulus·k + offset)^power)`
    BbpTerm {
        base: u32,
        modulus: u32,
        offset: u32,
        power: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub digits: u32,
}

/// `pi` correctly rounded by MPFR.
pub fn gen_pi(digits: u32) -> Result<Float> {
    check_digits(digits)?;
    Ok(Float::with_val(bits_for_digits(digits), Constant::Pi))
}

pub fn eval_series(spec: SeriesSpec) -> Result<Float> {
    let digits = spec.digits;
    check_digits(digits)?;
    match spec.kind {
        SeriesKind::Pi => gen_pi(digits),
        SeriesKind::Zeta(s) => {
            if s < 2 {
                return Err(Error::InvalidParameter(format!("zeta({s}) diverges")));
            }
            Ok(finish(
                Float::with_val(work_bits(digits), Float::zeta_u(s)),
                digits,
            ))
        }
        SeriesKind::CentralBinom { k, alternating } => {
            if k < 1 {
                return Err(Error::InvalidParameter(
                    "central binomial sum needs k >= 1".into(),
                ));
            }
            Ok(finish(
                central_binom_sum(k, alternating, work_bits(digits)),
                digits,
            ))
        }
        SeriesKind::BbpTerm {
            base,
            modulus,
            offset,
            power,
        } => {
            if base < 2 || modulus < 1 || offset < 1 || offset > modulus || power < 1 {
                return Err(Error::InvalidParameter(format!(
                    "unsupported BBP term base={base} modulus={modulus} offset={offset} power={power}"
                )));
            }
            Ok(finish(
                bbp_term(base, modulus, offset, power, work_bits(digits)),
                digits,
            ))
        }
    }
}

/// Consecutive terms shrink by at least a factor 3 (the ratio is
/// `(n/(n+1))^k (n+1)/(2(2n+1)) <= 1/3`), so the tail after the last term
/// added is at most 1.5 times the first omitted term.
fn central_binom_sum(k: u32, alternating: bool, bits: u32) -> Float {
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut sum = Float::new(bits);
    let mut binom = Integer::from(2);
    let mut n: u32 = 1;
    loop {
        let denom = Integer::from(n).pow(k) * &binom;
        let term = Float::with_val(bits, denom).recip();
        if alternating && n.is_multiple_of(2) {
            sum -= &term;
        } else {
            sum += &term;
        }
        if term * 2u32 < eps {
            break;
        }
        // C(2n+2, n+1) = C(2n, n) · 2(2n+1) / (n+1)
        binom *= 2 * (2 * n + 1);
        binom /= n + 1;
        n += 1;
    }
    sum
}

/// Terms shrink by at least `1/base`, so the tail after a term `t` is at
/// most `t/(base-1)`.
fn bbp_term(base: u32, modulus: u32, offset: u32, power: u32, bits: u32) -> Float {
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut sum = Float::new(bits);
    let mut scale = Integer::from(1);
    let mut k: u32 = 0;
    loop {
        let d = Integer::from(modulus * k + offset).pow(power) * &scale;
        let term = Float::with_val(bits, d).recip();
        sum += &term;
        if term / (base - 1) < eps {
            break;
        }
        scale *= base;
        k += 1;
    }
    sum
}

/// `value^(1/r)` by Newton's method with the precision doubled each step.
fn nth_root(value: u32, r: u32, bits: u32) -> Float {
    let mut prec = 53;
    let mut x = Float::with_val(prec, (value as f64).powf(1.0 / r as f64));
    loop {
        prec = (prec * 2).min(bits + 16);
        x.set_prec(prec);
        // x -= (x^r - v) / (r x^(r-1))
        let xr1 = Float::with_val(prec, x.clone().pow(r - 1));
        let fx = Float::with_val(prec, &xr1 * &x) - value;
        let dfx = xr1 * r;
        x -= fx / dfx;
        if prec >= bits + 16 {
            break;
        }
    }
    // one more step at full precision absorbs the error of the last doubling
    let xr1 = Float::with_val(prec, x.clone().pow(r - 1));
    let fx = Float::with_val(prec, &xr1 * &x) - value;
    x -= fx / (xr1 * r);
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgebraicSpec {
    pub r: u32,
    pub s: u32,
    pub digits: u32,
}

impl AlgebraicSpec {
    /// Length of the power vector that contains a relation.
    pub fn n(&self) -> usize {
        (self.r * self.s + 1) as usize
    }
}

/// `3^(1/r) - 2^(1/s)`.
pub fn gen_algebraic(spec: AlgebraicSpec) -> Result<Float> {
    check_digits(spec.digits)?;
    if spec.r < 1 || spec.s < 1 {
        return Err(Error::InvalidParameter("r and s must be positive".into()));
    }
    let bits = work_bits(spec.digits);
    let a = nth_root(3, spec.r, bits);
    let b = nth_root(2, spec.s, bits);
    Ok(finish(a - b, spec.digits))
}

/// `(1, alpha, ..., alpha^n)` by repeated multiplication.
pub fn power_vector(alpha: &Float, n: usize) -> Result<Vec<Float>> {
    if n < 1 {
        return Err(Error::InvalidParameter("power vector needs n >= 1".into()));
    }
    let prec = alpha.prec();
    let mut out = Vec::with_capacity(n + 1);
    let mut p = Float::with_val(prec, 1);
    for _ in 0..=n {
        out.push(p.clone());
        p *= alpha;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRootSpec {
    /// Ascending degree.
    pub coefficients: Vec<Integer>,
    pub seed: String,
    pub digits: u32,
}

/// `(p(x), p'(x), sum |c_i| |x|^i)` by Horner's rule.
fn horner(coeffs: &[Integer], x: &Float) -> (Float, Float, Float) {
    let prec = x.prec();
    let ax = Float::with_val(prec, x.abs_ref());
    let mut p = Float::new(prec);
    let mut dp = Float::new(prec);
    let mut scale = Float::new(prec);
    for c in coeffs.iter().rev() {
        dp = dp * x + &p;
        p = p * x + c;
        scale = scale * &ax + Float::with_val(prec, c).abs();
    }
    (p, dp, scale)
}

const MAX_NEWTON_STEPS: usize = 64;

/// Newton refinement of a simple real root of the polynomial, stopping once
/// `|p(x)| < 10^(-digits-2) · sum |c_i| |x|^i`.
pub fn refine_root(spec: &PolyRootSpec) -> Result<Float> {
    check_digits(spec.digits)?;
    let coeffs = &spec.coefficients;
    let degree = coeffs
        .iter()
        .rposition(|c| *c != 0)
        .ok_or_else(|| Error::InvalidParameter("polynomial is identically zero".into()))?;
    let coeffs = &coeffs[..=degree];
    let bits = work_bits(spec.digits);
    let mut x = parse_decimal(&spec.seed, spec.digits + GUARD_DIGITS)?;
    if degree == 1 {
        let root = -(Float::with_val(bits, &coeffs[0]) / &coeffs[1]);
        return Ok(finish(root, spec.digits));
    }
    let tol = Float::with_val(bits, 10).pow(-(spec.digits as i32) - 2);
    for _ in 0..MAX_NEWTON_STEPS {
        let (p, dp, scale) = horner(coeffs, &x);
        if Float::with_val(bits, p.abs_ref()) < Float::with_val(bits, &tol * &scale) {
            return Ok(finish(x, spec.digits));
        }
        if dp.is_zero() {
            return Err(Error::InvalidParameter(
                "derivative vanishes at the iterate".into(),
            ));
        }
        x -= p / dp;
        if !x.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        steps: MAX_NEWTON_STEPS,
    })
}

/// Degree-12 polynomial satisfied by the third bifurcation point of the
/// logistic map, ascending degree.
pub const B3_COEFFICIENTS: [i64; 13] =
    [4913, 0, 2108, -604, -977, 8, 44, 392, -193, -40, 48, -12, 1];
pub const B3_SEED: &str = "3.54409035955";

pub fn gen_b3(digits: u32) -> Result<Float> {
    refine_root(&PolyRootSpec {
        coefficients: B3_COEFFICIENTS.iter().map(|&c| Integer::from(c)).collect(),
        seed: B3_SEED.to_string(),
        digits,
    })
}

/// `zeta(5) / sum (-1)^(k-1) / (k^5 C(2k,k))`.
pub fn gen_z5(digits: u32) -> Result<Float> {
    check_digits(digits)?;
    let bits = work_bits(digits);
    let z = Float::with_val(bits, Float::zeta_u(5));
    let s = central_binom_sum(5, true, bits);
    Ok(finish(z / s, digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent pi: Machin's formula with alternating-series arctangents.
    fn machin_pi(bits: u32) -> Float {
        let atan_inv = |q: u32| {
            let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 8));
            let mut sum = Float::new(bits);
            let mut pow = Float::with_val(bits, q).recip();
            let q2 = q * q;
            let mut k = 0u32;
            loop {
                let term = Float::with_val(bits, &pow / (2 * k + 1));
                if k.is_multiple_of(2) {
                    sum += &term;
                } else {
                    sum -= &term;
                }
                if term < eps {
                    break;
                }
                pow /= q2;
                k += 1;
            }
            sum
        };
        (atan_inv(5) * 4u32 - atan_inv(239)) * 4u32
    }

    fn rel_err(a: &Float, b: &Float) -> f64 {
        let d = Float::with_val(a.prec().max(b.prec()), a - b);
        (d / b).to_f64().abs()
    }

    #[test]
    fn pi_matches_machin() {
        let pi = gen_pi(40).unwrap();
        let oracle = machin_pi(bits_for_digits(60));
        assert!(rel_err(&pi, &oracle) < 1e-38);
        assert!(pi
            .to_string_radix(10, Some(20))
            .starts_with("3.141592653589793238"));
        // self-consistency with a higher-precision call
        let hi = gen_pi(70).unwrap();
        assert!(rel_err(&gen_pi(50).unwrap(), &hi) < 1e-48);
    }

    #[test]
    fn zeta_values_match_pi_powers() {
        let bits = bits_for_digits(80);
        let pi = machin_pi(bits);
        let z2 = eval_series(SeriesSpec {
            kind: SeriesKind::Zeta(2),
            digits: 50,
        })
        .unwrap();
        let z4 = eval_series(SeriesSpec {
            kind: SeriesKind::Zeta(4),
            digits: 50,
        })
        .unwrap();
        let pi2 = Float::with_val(bits, &pi * &pi);
        assert!(rel_err(&z2, &(pi2.clone() / 6u32)) < 1e-48);
        assert!(rel_err(&z4, &(Float::with_val(bits, &pi2 * &pi2) / 90u32)) < 1e-48);
        assert!(eval_series(SeriesSpec {
            kind: SeriesKind::Zeta(1),
            digits: 50
        })
        .is_err());
    }

    #[test]
    fn central_binomial_identities() {
        let d = 60;
        let bits = bits_for_digits(90);
        let pi = machin_pi(bits);
        let s2 = eval_series(SeriesSpec {
            kind: SeriesKind::CentralBinom {
                k: 2,
                alternating: false,
            },
            digits: d,
        })
        .unwrap();
        let pi2 = Float::with_val(bits, &pi * &pi);
        // zeta(2) = 3 S2 = pi^2 / 6
        assert!(rel_err(&(s2 * 18u32), &pi2) < 1e-58);
        // S(4) = 17 pi^4 / 3240
        let s4 = eval_series(SeriesSpec {
            kind: SeriesKind::CentralBinom {
                k: 4,
                alternating: false,
            },
            digits: d,
        })
        .unwrap();
        let pi4 = Float::with_val(bits, &pi2 * &pi2);
        assert!(rel_err(&(s4 * 3240u32), &(pi4 * 17u32)) < 1e-57);
        // zeta(3) = 5/2 alternating S3
        let s3 = eval_series(SeriesSpec {
            kind: SeriesKind::CentralBinom {
                k: 3,
                alternating: true,
            },
            digits: d,
        })
        .unwrap();
        let z3 = eval_series(SeriesSpec {
            kind: SeriesKind::Zeta(3),
            digits: d,
        })
        .unwrap();
        assert!(rel_err(&(s3 * 5u32 / 2u32), &z3) < 1e-58);
    }

    #[test]
    fn bbp_partial_sums_and_formula() {
        let d = 60;
        let bits = bits_for_digits(90);
        let s: Vec<Float> = (1..=8)
            .map(|j| {
                eval_series(SeriesSpec {
                    kind: SeriesKind::BbpTerm {
                        base: 16,
                        modulus: 8,
                        offset: j,
                        power: 1,
                    },
                    digits: d,
                })
                .unwrap()
            })
            .collect();
        // S_1 lies between its first term and the geometric bound
        assert!(s[0] > 1 && s[0] < Float::with_val(bits, 16) / 15u32);
        let combo = Float::with_val(bits, &s[0] * 4u32)
            - Float::with_val(bits, &s[3] * 2u32)
            - &s[4]
            - &s[5];
        assert!(rel_err(&combo, &machin_pi(bits)) < 1e-58);
        let bad = SeriesSpec {
            kind: SeriesKind::BbpTerm {
                base: 16,
                modulus: 8,
                offset: 9,
                power: 1,
            },
            digits: d,
        };
        assert!(eval_series(bad).is_err());
    }

    #[test]
    fn series_are_self_consistent() {
        for kind in [
            SeriesKind::Zeta(3),
            SeriesKind::CentralBinom {
                k: 5,
                alternating: true,
            },
            SeriesKind::BbpTerm {
                base: 729,
                modulus: 12,
                offset: 7,
                power: 2,
            },
        ] {
            let lo = eval_series(SeriesSpec { kind, digits: 40 }).unwrap();
            let hi = eval_series(SeriesSpec { kind, digits: 60 }).unwrap();
            assert!(rel_err(&lo, &hi) < 1e-38, "{kind:?}");
        }
    }

    #[test]
    fn algebraic_values() {
        let a = gen_algebraic(AlgebraicSpec {
            r: 2,
            s: 2,
            digits: 40,
        })
        .unwrap();
        let bits = bits_for_digits(60);
        let oracle = Float::with_val(bits, 3).sqrt() - Float::with_val(bits, 2).sqrt();
        assert!(rel_err(&a, &oracle) < 1e-38);
        assert!(a
            .to_string_radix(10, Some(30))
            .starts_with("3.17837245195782244725757617296"));
        let one = gen_algebraic(AlgebraicSpec {
            r: 1,
            s: 1,
            digits: 40,
        })
        .unwrap();
        assert_eq!(one, 1);
        // alpha^5 recovered from the defining radicals
        let a55 = gen_algebraic(AlgebraicSpec {
            r: 5,
            s: 5,
            digits: 100,
        })
        .unwrap();
        let b = bits_for_digits(120);
        let r3 = Float::with_val(b, Float::with_val(b, 3).ln() / 5u32).exp();
        let r2 = Float::with_val(b, Float::with_val(b, 2).ln() / 5u32).exp();
        assert!(rel_err(&a55, &(r3 - r2)) < 1e-98);
    }

    #[test]
    fn power_vectors() {
        let two = Float::with_val(64, 2);
        let v = power_vector(&two, 3).unwrap();
        assert_eq!(v, vec![1, 2, 4, 8]);
        assert!(power_vector(&two, 0).is_err());
    }

    #[test]
    fn root_refinement() {
        let sqrt2 = refine_root(&PolyRootSpec {
            coefficients: vec![Integer::from(-2), Integer::ZERO, Integer::from(1)],
            seed: "1.4".into(),
            digits: 50,
        })
        .unwrap();
        assert!(rel_err(&sqrt2, &Float::with_val(300, 2).sqrt()) < 1e-49);
        let seven = refine_root(&PolyRootSpec {
            coefficients: vec![Integer::from(-7), Integer::from(1)],
            seed: "123".into(),
            digits: 40,
        })
        .unwrap();
        assert_eq!(seven, 7);
        let b3 = gen_b3(60).unwrap();
        assert!(b3
            .to_string_radix(10, Some(12))
            .starts_with("3.54409035955"));
        let none = refine_root(&PolyRootSpec {
            coefficients: vec![Integer::from(1), Integer::ZERO, Integer::from(1)],
            seed: "0.5".into(),
            digits: 40,
        });
        assert!(none.is_err());
    }

    #[test]
    fn z5_is_finite_and_stable() {
        let lo = gen_z5(40).unwrap();
        let hi = gen_z5(60).unwrap();
        assert!(rel_err(&lo, &hi) < 1e-38);
        assert!(lo > 2 && lo < 3);
    }
}
