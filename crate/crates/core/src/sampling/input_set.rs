use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Compact set of initial conditions, sampled uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSet {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl InputSet {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "box bounds need matching non-zero dimensions, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(Error::InvalidArgument(format!(
                    "box axis {i} has invalid bounds [{l}, {u}]"
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// The cube `[lower, upper]^dimension`.
    pub fn cube(lower: f64, upper: f64, dimension: usize) -> Result<Self> {
        Self::new_box(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "ball center must be finite and non-empty".into(),
            ));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be >= 0, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        match self {
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| l <= v && v <= u),
            Self::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum();
                d2 <= radius * radius
            }
        }
    }

    /// Smallest axis-aligned box containing the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Box { lower, upper } => (lower.clone(), upper.clone()),
            Self::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// One uniform draw. Balls are sampled by rejection from the bounding
    /// box; a zero-radius ball returns its center.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| (l + (u - l) * rng.random::<f64>()).clamp(l, u))
                .collect(),
            Self::Ball { center, radius } => {
                if *radius == 0.0 {
                    return center.clone();
                }
                loop {
                    let candidate: Vec<f64> = center
                        .iter()
                        .map(|&c| c + radius * (2.0 * rng.random::<f64>() - 1.0))
                        .collect();
                    if self.contains(&candidate) {
                        return candidate;
                    }
                }
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    f.write_str("[")?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("]")
}

/// `box([l1,...],[u1,...])` or `ball([c1,...],r)`.
impl fmt::Display for InputSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Box { lower, upper } => {
                f.write_str("box(")?;
                write_list(f, lower)?;
                f.write_str(",")?;
                write_list(f, upper)?;
                f.write_str(")")
            }
            Self::Ball { center, radius } => {
                f.write_str("ball(")?;
                write_list(f, center)?;
                write!(f, ",{radius})")
            }
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Config(format!("expected a bracketed list, got `{s}`")))?;
    inner
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number `{}`: {e}", v.trim())))
        })
        .collect()
}

/// Splits `a],[b` style argument lists at top-level commas.
fn split_args(s: &str) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl FromStr for InputSet {
    type Err = Error;

    /// Also accepts `cube(lower,upper,dimension)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Config(format!("cannot parse input set `{s}`")))?;
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{s}`")))?;
        let args = split_args(body);
        match (kind.trim(), args.as_slice()) {
            ("box", [lo, hi]) => Self::new_box(parse_list(lo)?, parse_list(hi)?),
            ("ball", [c, r]) => {
                let radius = r
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("bad radius `{}`: {e}", r.trim())))?;
                Self::new_ball(parse_list(c)?, radius)
            }
            ("cube", [lo, hi, n]) => {
                let num = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number `{}`: {e}", v.trim())))
                };
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("bad dimension `{}`: {e}", n.trim())))?;
                Self::cube(num(lo)?, num(hi)?, n)
            }
            _ => Err(Error::Config(format!("cannot parse input set `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["box([1.25,2.28],[1.55,2.32])", "ball([-5,-5],1)"] {
            let set: InputSet = text.parse().unwrap();
            assert_eq!(set.to_string(), text);
            assert_eq!(set.to_string().parse::<InputSet>().unwrap(), set);
        }
        let cube: InputSet = "cube(1.0, 1.1, 9)".parse().unwrap();
        assert_eq!(cube.dimension(), 9);
        assert!("sphere([0],1)".parse::<InputSet>().is_err());
        assert!("box([1],[0])".parse::<InputSet>().is_err());
        assert!("ball([0],-1)".parse::<InputSet>().is_err());
    }

    #[test]
    fn zero_radius_ball_is_a_point_mass() {
        let set = InputSet::new_ball(vec![3.0, 4.0], 0.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..5 {
            assert_eq!(set.sample(&mut rng), vec![3.0, 4.0]);
        }
    }

    #[test]
    fn bounding_box_of_ball() {
        let set = InputSet::new_ball(vec![-5.0, -5.0], 1.0).unwrap();
        assert_eq!(set.bounding_box(), (vec![-6.0, -6.0], vec![-4.0, -4.0]));
    }
}
