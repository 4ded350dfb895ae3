use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatioError {
    #[error("cannot parse `{0}` as a ratio (expected p/q, an integer, or a decimal)")]
    Syntax(String),
    #[error("sweep ratio must lie in (0, 1], got {0}")]
    OutOfRange(String),
}

/// Fraction `R` of a codebook swept per slot, kept as a reduced rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SweepRatio {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

impl SweepRatio {
    pub const FULL: SweepRatio = SweepRatio { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, RatioError> {
        if den == 0 || num == 0 || num > den {
            return Err(RatioError::OutOfRange(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn numer(self) -> u64 {
        self.num
    }

    pub fn denom(self) -> u64 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_full(self) -> bool {
        self.num == self.den
    }

    /// `N_s * R` when it is an integer.
    pub fn exact_beams(self, num_sectors: usize) -> Option<usize> {
        let prod = num_sectors as u64 * self.num;
        (prod % self.den == 0).then(|| (prod / self.den) as usize)
    }

    /// `N_s * R` rounded half up, never below one beam.
    pub fn beams(self, num_sectors: usize) -> usize {
        let prod = num_sectors as u64 * self.num;
        let rounded = (2 * prod + self.den) / (2 * self.den);
        (rounded as usize).clamp(1, num_sectors.max(1))
    }
}

impl fmt::Display for SweepRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for SweepRatio {
    type Err = RatioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let syntax = || RatioError::Syntax(s.to_string());
        let (num, den) = if let Some((p, q)) = s.split_once('/') {
            (p.trim().parse::<u64>().map_err(|_| syntax())?, q.trim().parse::<u64>().map_err(|_| syntax())?)
        } else if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(syntax());
            }
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| syntax())? };
            let den = 10u64.pow(frac.len() as u32);
            let frac: u64 = frac.parse().map_err(|_| syntax())?;
            (int * den + frac, den)
        } else {
            (s.parse::<u64>().map_err(|_| syntax())?, 1)
        };
        Self::new(num, den).map_err(|_| RatioError::OutOfRange(s.to_string()))
    }
}

impl TryFrom<String> for SweepRatio {
    type Error = RatioError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SweepRatio> for String {
    fn from(r: SweepRatio) -> Self {
        r.to_string()
    }
}
