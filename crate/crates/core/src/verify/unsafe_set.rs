use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite union of closed intervals of output values, kept sorted and
/// disjoint. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UnsafeSet {
    intervals: Vec<(f64, f64)>,
}

impl UnsafeSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{y >= u}`.
    pub fn at_least(u: f64) -> Result<Self> {
        Self::from_intervals(vec![(u, f64::INFINITY)])
    }

    /// `{y <= u}`.
    pub fn at_most(u: f64) -> Result<Self> {
        Self::from_intervals(vec![(f64::NEG_INFINITY, u)])
    }

    pub fn between(a: f64, b: f64) -> Result<Self> {
        Self::from_intervals(vec![(a, b)])
    }

    /// Normalizes an arbitrary list of intervals.
    pub fn from_intervals(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if a.is_nan() || b.is_nan() || a > b || a == f64::INFINITY || b == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!(
                    "invalid unsafe interval [{a}, {b}]"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(Self { intervals: out })
    }

    pub fn union(&self, other: &Self) -> Self {
        let all = self
            .intervals
            .iter()
            .chain(&other.intervals)
            .copied()
            .collect();
        Self::from_intervals(all).expect("both operands are normalized")
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= y && y <= b)
    }

    /// True when `[lo, hi]` meets the set.
    pub fn meets(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= hi && lo <= b)
    }
}

impl fmt::Display for UnsafeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("none");
        }
        for (i, &(a, b)) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" or ")?;
            }
            match (a.is_finite(), b.is_finite()) {
                (true, false) => write!(f, "y >= {a}")?,
                (false, true) => write!(f, "y <= {b}")?,
                (false, false) => f.write_str("any")?,
                (true, true) => write!(f, "[{a}, {b}]")?,
            }
        }
        Ok(())
    }
}

/// Parses unions such as `y >= 3`, `y <= -1 or [2, 2.5]`, `none`, `any`.
impl FromStr for UnsafeSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |part: &str| Error::Config(format!("cannot parse unsafe set component `{part}`"));
        let num = |v: &str, part: &str| v.trim().parse::<f64>().map_err(|_| bad(part));
        let text = s.trim();
        if text.is_empty() || text == "none" || text == "empty" {
            return Ok(Self::empty());
        }
        let mut intervals = Vec::new();
        for part in text.split(" or ").map(str::trim) {
            let compact: String = part.chars().filter(|c| !c.is_whitespace()).collect();
            if compact == "any" {
                intervals.push((f64::NEG_INFINITY, f64::INFINITY));
            } else if let Some(v) = compact.strip_prefix("y>=") {
                intervals.push((num(v, part)?, f64::INFINITY));
            } else if let Some(v) = compact.strip_prefix("y<=") {
                intervals.push((f64::NEG_INFINITY, num(v, part)?));
            } else if let Some(body) = compact.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let (a, b) = body.split_once(',').ok_or_else(|| bad(part))?;
                intervals.push((num(a, part)?, num(b, part)?));
            } else {
                return Err(bad(part));
            }
        }
        Self::from_intervals(intervals).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_overlaps() {
        let u = UnsafeSet::from_intervals(vec![
            (5.0, 7.0),
            (1.0, 2.0),
            (1.5, 3.0),
            (6.0, f64::INFINITY),
        ])
        .unwrap();
        assert_eq!(u.intervals(), &[(1.0, 3.0), (5.0, f64::INFINITY)]);
    }

    #[test]
    fn parse_and_display() {
        let u: UnsafeSet = "y <= -1 or [2, 2.5] or y>=40".parse().unwrap();
        assert_eq!(u.to_string(), "y <= -1 or [2, 2.5] or y >= 40");
        assert_eq!(u.to_string().parse::<UnsafeSet>().unwrap(), u);
        assert!("none".parse::<UnsafeSet>().unwrap().is_empty());
        assert!("y > 3".parse::<UnsafeSet>().is_err());
        assert!("[3, 1]".parse::<UnsafeSet>().is_err());
    }

    #[test]
    fn membership() {
        let u = UnsafeSet::at_least(3.0).unwrap();
        assert!(u.contains(3.0) && !u.contains(2.999));
        assert!(u.meets(2.0, 3.0) && !u.meets(-1.0, 2.9));
        assert!(!UnsafeSet::empty().meets(f64::NEG_INFINITY, f64::INFINITY));
    }
}
