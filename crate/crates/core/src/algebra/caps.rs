use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::Error;

/// Default bound on the number of stored terms produced by a single product.
pub const DEFAULT_TERM_GUARD: usize = 1_000_000;

/// Environment variable overriding [`DEFAULT_TERM_GUARD`].
pub const TERM_GUARD_ENV: &str = "QMORSE_TERM_GUARD";

/// Term guard in effect for this process.
pub fn default_term_guard() -> usize {
    static GUARD: OnceLock<usize> = OnceLock::new();
    *GUARD.get_or_init(|| {
        std::env::var(TERM_GUARD_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&g| g > 0)
            .unwrap_or(DEFAULT_TERM_GUARD)
    })
}

/// A non-negative half-integer, stored as twice its value.
///
/// `adag` and `a` carry weight 1/2, `hbar` carries weight 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(u32);

impl Weight {
    pub const ZERO: Weight = Weight(0);

    pub const fn from_halves(h: u32) -> Self {
        Weight(h)
    }
    pub const fn integer(n: u32) -> Self {
        Weight(2 * n)
    }
    pub const fn halves(self) -> u32 {
        self.0
    }
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
    pub fn saturating_add(self, o: Weight) -> Weight {
        Weight(self.0.saturating_add(o.0))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// Accepts `"n"`, `"p/2"` and decimal halves such as `"4.5"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::format(format!("invalid weight {s:?}: expected a non-negative half-integer"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u32 = n.trim().parse().map_err(|_| bad())?;
            let d: u32 = d.trim().parse().map_err(|_| bad())?;
            return match d {
                1 => Ok(Weight(2 * n)),
                2 => Ok(Weight(n)),
                _ => Err(bad()),
            };
        }
        if let Some((i, frac)) = s.split_once('.') {
            let i: u32 = i.parse().map_err(|_| bad())?;
            return match frac.trim_end_matches('0') {
                "" => Ok(Weight(2 * i)),
                "5" => Ok(Weight(2 * i + 1)),
                _ => Err(bad()),
            };
        }
        s.parse::<u32>().map(Weight::integer).map_err(|_| bad())
    }
}

/// Truncation policy attached to every series value.
///
/// Terms with `t`-exponent above `t_cap` or weight above `weight_cap` are
/// dropped silently; the caps are part of a value's meaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Caps {
    pub t_cap: u32,
    pub weight_cap: Weight,
    pub term_guard: usize,
}

impl Caps {
    pub fn new(t_cap: u32, weight_cap: Weight) -> Self {
        Caps {
            t_cap,
            weight_cap,
            term_guard: default_term_guard(),
        }
    }

    pub fn with_term_guard(mut self, guard: usize) -> Self {
        self.term_guard = guard;
        self
    }

    /// Component-wise minimum; the caps of a binary result.
    pub fn meet(&self, o: &Caps) -> Caps {
        Caps {
            t_cap: self.t_cap.min(o.t_cap),
            weight_cap: self.weight_cap.min(o.weight_cap),
            term_guard: self.term_guard.min(o.term_guard),
        }
    }

    pub fn with_weight_cap(mut self, w: Weight) -> Self {
        self.weight_cap = w;
        self
    }

    pub fn with_t_cap(mut self, t: u32) -> Self {
        self.t_cap = t;
        self
    }

    /// Raises the weight cap by `extra` half-units.
    pub fn widen(mut self, extra_halves: u32) -> Self {
        self.weight_cap = Weight(self.weight_cap.0 + extra_halves);
        self
    }

    pub fn admits(&self, t: u32, weight_halves: u32) -> bool {
        t <= self.t_cap && weight_halves <= self.weight_cap.0
    }

    pub fn guard(&self, len: usize, what: &str) -> Result<(), Error> {
        if len > self.term_guard {
            Err(Error::resource(format!(
                "{what}: {len} terms exceed the term-count guard {} (set {TERM_GUARD_ENV} to raise it)",
                self.term_guard
            )))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_parsing() {
        assert_eq!("9/2".parse::<Weight>().unwrap(), Weight::from_halves(9));
        assert_eq!("4".parse::<Weight>().unwrap(), Weight::integer(4));
        assert_eq!("4.5".parse::<Weight>().unwrap(), Weight::from_halves(9));
        assert_eq!("8/2".parse::<Weight>().unwrap(), Weight::integer(4));
        assert!("1/3".parse::<Weight>().is_err());
        assert!("-1".parse::<Weight>().is_err());
        assert_eq!(Weight::from_halves(9).to_string(), "9/2");
        assert_eq!(Weight::integer(3).to_string(), "3");
    }

    #[test]
    fn meet_takes_minimum() {
        let a = Caps::new(4, Weight::integer(3)).with_term_guard(10);
        let b = Caps::new(2, Weight::integer(5)).with_term_guard(100);
        let m = a.meet(&b);
        assert_eq!(m.t_cap, 2);
        assert_eq!(m.weight_cap, Weight::integer(3));
        assert_eq!(m.term_guard, 10);
    }
}
