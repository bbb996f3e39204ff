use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A non-empty sub-interval of `[0,1]` with independently open or closed ends.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
    lo_open: bool,
    hi_open: bool,
}

/// Bracket shape of an interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bracket {
    /// `[a,b]`
    Closed,
    /// `(a,b]`
    LeftOpen,
    /// `[a,b)`
    RightOpen,
    /// `(a,b)`
    Open,
}

/// Classification of the left endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeftClass {
    /// Left endpoint is strictly positive.
    Positive,
    /// `[0, ...`: the edge may carry probability exactly 0.
    ZeroClosed,
    /// `(0, ...`
    ZeroOpen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntervalClass {
    pub bracket: Bracket,
    pub left: LeftClass,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_open: bool, hi_open: bool) -> Result<Self> {
        for end in [&lo, &hi] {
            if *end < Rational::zero() || *end > Rational::one() {
                return Err(Error::EndpointOutOfRange(end.to_string()));
            }
        }
        let iv = Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        };
        let nonempty = iv.lo < iv.hi || (iv.lo == iv.hi && !lo_open && !hi_open);
        if !nonempty {
            return Err(Error::EmptyInterval(iv.to_string()));
        }
        Ok(iv)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn point(value: Rational) -> Result<Self> {
        Self::new(value.clone(), value, false, false)
    }

    /// The "no edge" interval `[0,0]`.
    pub fn zero() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::zero(),
            lo_open: false,
            hi_open: false,
        }
    }

    /// The absorbing self-loop interval `[1,1]`.
    pub fn one() -> Self {
        Interval {
            lo: Rational::one(),
            hi: Rational::one(),
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_open(&self) -> bool {
        self.lo_open
    }

    pub fn hi_open(&self) -> bool {
        self.hi_open
    }

    pub fn is_zero(&self) -> bool {
        self.hi.is_zero()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_open {
            *x > self.lo
        } else {
            *x >= self.lo
        };
        let below = if self.hi_open {
            *x < self.hi
        } else {
            *x <= self.hi
        };
        above && below
    }

    pub fn classify(&self) -> IntervalClass {
        let bracket = match (self.lo_open, self.hi_open) {
            (false, false) => Bracket::Closed,
            (true, false) => Bracket::LeftOpen,
            (false, true) => Bracket::RightOpen,
            (true, true) => Bracket::Open,
        };
        let left = if !self.lo.is_zero() {
            LeftClass::Positive
        } else if self.lo_open {
            LeftClass::ZeroOpen
        } else {
            LeftClass::ZeroClosed
        };
        IntervalClass { bracket, left }
    }

    /// `[0, ...`: probability exactly 0 is admissible.
    pub fn admits_zero(&self) -> bool {
        self.lo.is_zero() && !self.lo_open
    }
}

pub fn classify(iv: &Interval) -> IntervalClass {
    iv.classify()
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}
