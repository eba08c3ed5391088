use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multipair::DEFAULT_BETA;
use crate::precision::{parse_decimal, EpsilonPolicy, DEFAULT_INTERMEDIATE_DIGITS};
use crate::pslq::default_gamma;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pslq,
    #[default]
    MultiPair,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pslq" => Ok(Algorithm::Pslq),
            "multipair" | "multi-pair" => Ok(Algorithm::MultiPair),
            _ => Err(Error::InvalidParameter(format!(
                "unknown algorithm {s:?} (expected pslq or multipair)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Pslq => "pslq",
            Algorithm::MultiPair => "multipair",
        })
    }
}

/// Numeric parameters of one search.
#[derive(Clone, Debug)]
pub struct PrecisionConfig {
    pub policy: EpsilonPolicy,
    /// `None` means `sqrt(4/3)`.
    pub gamma: Option<String>,
    pub beta: f64,
    pub max_iters: u64,
}

impl PrecisionConfig {
    pub const DEFAULT_MAX_ITERS: u64 = 10_000_000;

    pub fn new(digits: u32) -> Result<Self> {
        Ok(Self {
            policy: EpsilonPolicy::with_digits(digits)?,
            gamma: None,
            beta: DEFAULT_BETA,
            max_iters: Self::DEFAULT_MAX_ITERS,
        })
    }

    pub fn digits(&self) -> u32 {
        self.policy.work_digits
    }

    pub fn gamma_value(&self) -> Result<Float> {
        let bits = self.policy.bits();
        match &self.gamma {
            None => Ok(default_gamma(bits)),
            Some(s) => parse_decimal(s, self.policy.work_digits),
        }
    }
}

/// Shadow-tier thresholds. The defaults for the double tier are the fixed
/// `1e13` entry cap, `1e-14` floor for `min|y|`, and `1e11` dynamic range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TierLimits {
    /// Flush once any `|A|` or `|B|` entry reaches this.
    pub entry_cap: f64,
    /// Flush once `min|y|` (scaled so `max|y| = 1`) drops to this.
    pub y_floor: f64,
    /// Largest admissible `max|y| / min|y|` at spawn.
    pub max_range: f64,
    /// When set, also flush once `min|y|` is within this factor of the
    /// tier's rounding noise `eps·n·max|A, B|`.
    pub noise_margin: Option<f64>,
}

impl TierLimits {
    pub const DOUBLE: TierLimits = TierLimits {
        entry_cap: 1e13,
        y_floor: 1e-14,
        max_range: 1e11,
        noise_margin: None,
    };

    /// Limits for a `digits`-digit intermediate tier, scaled from the double
    /// tier's roughly 16 digits: cap `10^(D-3)`, floor `10^(2-D)`, range
    /// `10^(D-5)`, plus a `10^10` noise margin.
    pub fn intermediate(digits: u32) -> Self {
        let d = digits as i32;
        TierLimits {
            entry_cap: 10f64.powi(d - 3),
            y_floor: 10f64.powi(2 - d),
            max_range: 10f64.powi(d - 5),
            noise_margin: Some(1e10),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelConfig {
    pub levels: u8,
    pub double: TierLimits,
    pub intermediate: TierLimits,
    pub intermediate_digits: u32,
    /// Skip `A` at full precision and detect exhaustion from `min|y|` alone.
    pub omit_full_a: bool,
}

impl LevelConfig {
    pub fn new(levels: u8) -> Result<Self> {
        if !(1..=3).contains(&levels) {
            return Err(Error::InvalidParameter(format!(
                "levels must be 1, 2 or 3, got {levels}"
            )));
        }
        Ok(Self {
            levels,
            double: TierLimits::DOUBLE,
            intermediate: TierLimits::intermediate(DEFAULT_INTERMEDIATE_DIGITS),
            intermediate_digits: DEFAULT_INTERMEDIATE_DIGITS,
            omit_full_a: levels >= 2,
        })
    }

    pub fn with_intermediate_digits(mut self, digits: u32) -> Result<Self> {
        if digits < 64 {
            return Err(Error::InvalidParameter(format!(
                "intermediate tier needs at least 64 digits, got {digits}"
            )));
        }
        self.intermediate_digits = digits;
        self.intermediate = TierLimits::intermediate(digits);
        Ok(self)
    }

    pub fn validate(&self, work_digits: u32) -> Result<()> {
        for lim in [self.double, self.intermediate] {
            let margin_ok = lim.noise_margin.is_none_or(|m| m >= 1.0);
            if !(lim.entry_cap > 0.0 && lim.y_floor > 0.0 && lim.max_range > 1.0 && margin_ok) {
                return Err(Error::InvalidParameter(
                    "tier thresholds must be positive".to_string(),
                ));
            }
        }
        if self.double.entry_cap > crate::precision::F64_EXACT_LIMIT {
            return Err(Error::InvalidParameter(
                "double-tier entry cap exceeds 2^53".to_string(),
            ));
        }
        if self.levels == 3 && self.intermediate_digits >= work_digits {
            return Err(Error::InvalidParameter(format!(
                "intermediate digits ({}) must be below working digits ({work_digits})",
                self.intermediate_digits
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intermediate_limits_extend_double_limits() {
        // 16 digits reproduces the double-tier values
        let d = TierLimits::intermediate(16);
        assert_eq!(d.entry_cap, 1e13);
        assert_eq!(d.y_floor, 1e-14);
        assert_eq!(d.max_range, 1e11);
        let i = TierLimits::intermediate(125);
        assert_eq!(i.entry_cap, 1e122);
    }

    #[test]
    fn level_defaults() {
        assert!(!LevelConfig::new(1).unwrap().omit_full_a);
        assert!(LevelConfig::new(2).unwrap().omit_full_a);
        assert!(LevelConfig::new(4).is_err());
        assert!(LevelConfig::new(3)
            .unwrap()
            .with_intermediate_digits(40)
            .is_err());
        assert!(LevelConfig::new(3).unwrap().validate(100).is_err());
        assert!(LevelConfig::new(3).unwrap().validate(200).is_ok());
    }

    #[test]
    fn algorithm_parsing() {
        assert_eq!("pslq".parse::<Algorithm>().unwrap(), Algorithm::Pslq);
        assert_eq!(
            "multipair".parse::<Algorithm>().unwrap(),
            Algorithm::MultiPair
        );
        assert!("lll".parse::<Algorithm>().is_err());
        assert_eq!(Algorithm::MultiPair.to_string(), "multipair");
    }

    #[test]
    fn custom_gamma_is_parsed() {
        let mut c = PrecisionConfig::new(50).unwrap();
        assert!(c.gamma_value().unwrap() > 1.1547);
        c.gamma = Some("2".into());
        assert_eq!(c.gamma_value().unwrap(), 2);
    }
}
