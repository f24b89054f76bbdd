use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact time quantity in integer picoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Duration(u64);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub const fn from_ps(ps: u64) -> Self {
        Duration(ps)
    }

    pub const fn from_ns(ns: u64) -> Self {
        Duration(ns * 1_000)
    }

    pub const fn as_ps(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn saturating_sub(self, rhs: Duration) -> Duration {
        Duration(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_sub(self, rhs: Duration) -> Option<Duration> {
        self.0.checked_sub(rhs.0).map(Duration)
    }

    /// Number of whole periods of `period` contained in `self`.
    pub fn cycles_of(self, period: Duration) -> u64 {
        self.0 / period.0
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl AddAssign for Duration {
    fn add_assign(&mut self, rhs: Duration) {
        self.0 += rhs.0;
    }
}

/// Panics on underflow; use [`Duration::saturating_sub`] when the order is not known.
impl Sub for Duration {
    type Output = Duration;
    fn sub(self, rhs: Duration) -> Duration {
        Duration(self.0.checked_sub(rhs.0).expect("Duration underflow"))
    }
}

impl Mul<u64> for Duration {
    type Output = Duration;
    fn mul(self, rhs: u64) -> Duration {
        Duration(self.0 * rhs)
    }
}

impl Mul<Duration> for u64 {
    type Output = Duration;
    fn mul(self, rhs: Duration) -> Duration {
        Duration(self * rhs.0)
    }
}

impl Sum for Duration {
    fn sum<I: Iterator<Item = Duration>>(iter: I) -> Duration {
        iter.fold(Duration::ZERO, Add::add)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ps", self.0)
    }
}

/// Exact per-word data time in picoseconds, kept rational so that
/// fractional per-word shares (cache-line refills split over a burst)
/// never round until a total is materialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordTime(Ratio<u64>);

impl WordTime {
    pub fn from_duration(d: Duration) -> Self {
        WordTime(Ratio::from_integer(d.as_ps()))
    }

    pub fn from_ratio(ps: Ratio<u64>) -> Self {
        WordTime(ps)
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    /// Total time for `beats` words, rounded up to a whole picosecond.
    pub fn for_beats(self, beats: u64) -> Duration {
        Duration::from_ps((self.0 * beats).ceil().to_integer())
    }

    /// The value as a whole number of picoseconds, if it is one.
    pub fn as_duration(self) -> Option<Duration> {
        self.0.is_integer().then(|| Duration::from_ps(self.0.to_integer()))
    }
}

impl Add for WordTime {
    type Output = WordTime;
    fn add(self, rhs: WordTime) -> WordTime {
        WordTime(self.0 + rhs.0)
    }
}

impl fmt::Display for WordTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{} ps", self.0.to_integer())
        } else {
            write!(f, "{}/{} ps", self.0.numer(), self.0.denom())
        }
    }
}
