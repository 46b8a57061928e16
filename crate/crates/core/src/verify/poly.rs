//! Real root isolation and range enclosure for univariate polynomials.
//!
//! Polynomials are coefficient slices in ascending order. Roots are isolated
//! recursively: the roots of `p'` split the domain into pieces on which `p`
//! is monotone, and each piece holds at most one sign change, which is then
//! narrowed by bisection. Signs are taken from interval evaluations, so an
//! ambiguous sign widens the result instead of losing a root.

use crate::scalar::Scalar;
use crate::verify::interval::Interval;

/// Drops trailing zero coefficients; the zero polynomial becomes empty.
pub fn trim<T: Scalar>(p: &[T]) -> &[T] {
    let len = p.iter().rposition(|c| *c != T::zero()).map_or(0, |i| i + 1);
    &p[..len]
}

pub fn eval<T: Scalar>(p: &[T], x: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Horner evaluation in interval arithmetic.
pub fn eval_interval<T: Scalar>(p: &[T], x: Interval<T>) -> Interval<T> {
    p.iter().rev().fold(Interval::point(T::zero()), |acc, &c| {
        acc * x + Interval::point(c)
    })
}

/// Mean-value enclosure `p(m) + p'(x) (x - m)` intersected with the Horner
/// enclosure; tight on narrow intervals around critical points.
pub fn eval_centered<T: Scalar>(p: &[T], x: Interval<T>) -> Interval<T> {
    let natural = eval_interval(p, x);
    let m = x.mid();
    let slope = eval_interval(&derivative(p), x);
    let centered = eval_interval(p, Interval::point(m)) + slope * (x - Interval::point(m));
    Interval::new(natural.lo.max(centered.lo), natural.hi.min(centered.hi))
}

pub fn derivative<T: Scalar>(p: &[T]) -> Vec<T> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * T::from_usize_lossy(j))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sign {
    Neg,
    Pos,
    Unknown,
}

fn sign_at<T: Scalar>(p: &[T], x: T) -> Sign {
    let v = eval_interval(p, Interval::point(x));
    if v.lo > T::zero() {
        Sign::Pos
    } else if v.hi < T::zero() {
        Sign::Neg
    } else {
        Sign::Unknown
    }
}

/// Sorted, disjoint intervals inside `[a, b]` that together contain every
/// root of `p` in `[a, b]`. Intervals from clean sign changes are at most
/// `tol` wide. The zero polynomial and nonzero constants report no roots.
pub fn isolate_roots<T: Scalar>(p: &[T], a: T, b: T, tol: T) -> Vec<Interval<T>> {
    let p = trim(p);
    if p.len() <= 1 || a > b {
        return Vec::new();
    }
    let critical = isolate_roots(&derivative(p), a, b, tol);
    let mut found = Vec::new();
    let mut left = a;
    for ci in &critical {
        monotone_piece(p, left, ci.lo, tol, &mut found);
        if eval_centered(p, *ci).contains(T::zero()) {
            found.push(*ci);
        }
        left = ci.hi;
    }
    monotone_piece(p, left, b, tol, &mut found);
    merge(found)
}

fn monotone_piece<T: Scalar>(p: &[T], l: T, r: T, tol: T, out: &mut Vec<Interval<T>>) {
    if l > r {
        return;
    }
    let (mut l, mut r) = (l, r);
    // Ambiguous signs at the ends are followed inwards as far as they go.
    if sign_at(p, l) == Sign::Unknown {
        let end = bisect(l, r, tol, |x| sign_at(p, x) == Sign::Unknown).1;
        let end = if sign_at(p, end) == Sign::Unknown {
            r
        } else {
            end
        };
        out.push(Interval::new(l, end));
        l = end;
    }
    if l < r && sign_at(p, r) == Sign::Unknown {
        let start = bisect(l, r, tol, |x| sign_at(p, x) != Sign::Unknown).0;
        out.push(Interval::new(start, r));
        r = start;
    }
    let (sl, sr) = (sign_at(p, l), sign_at(p, r));
    if l >= r || sl == Sign::Unknown || sr == Sign::Unknown || sl == sr {
        return;
    }
    // Narrow from the left to where the sign stops being `sl`; if that point
    // is ambiguous, continue from there to where the sign becomes `sr`.
    let (lo, first) = bisect(l, r, tol, |x| sign_at(p, x) == sl);
    let hi = if sign_at(p, first) == sr {
        first
    } else {
        bisect(first, r, tol, |x| sign_at(p, x) != sr).1
    };
    out.push(Interval::new(lo, hi));
}

/// Shrinks `[lo, hi]` with `pred(lo)` true and `pred(hi)` false to width
/// `tol`, keeping that property.
fn bisect<T: Scalar>(mut lo: T, mut hi: T, tol: T, pred: impl Fn(T) -> bool) -> (T, T) {
    while hi - lo > tol {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn merge<T: Scalar>(mut v: Vec<Interval<T>>) -> Vec<Interval<T>> {
    v.sort_by(|x, y| x.lo.partial_cmp(&y.lo).expect("finite interval bounds"));
    let mut out: Vec<Interval<T>> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Enclosure of `{p(x) : x in [a, b]}`. Extrema sit at the endpoints or at
/// roots of `p'`, so only those places are evaluated.
pub fn range<T: Scalar>(p: &[T], a: T, b: T, tol: T) -> Interval<T> {
    let p = trim(p);
    if p.is_empty() {
        return Interval::point(T::zero());
    }
    let mut out = eval_interval(p, Interval::point(a)).hull(&eval_interval(p, Interval::point(b)));
    for ci in isolate_roots(&derivative(p), a, b, tol) {
        out = out.hull(&eval_centered(p, ci));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roots_of_a_cubic() {
        // (x - 0.2)(x - 0.5)(x - 0.9)
        let p = [-0.09, 0.73, -1.6, 1.0];
        let roots = isolate_roots(&p, 0.0, 1.0, 1e-12);
        assert_eq!(roots.len(), 3);
        for (iv, want) in roots.iter().zip([0.2, 0.5, 0.9]) {
            assert!(
                iv.lo - 1e-12 <= want && want <= iv.hi + 1e-12,
                "{iv:?} vs {want}"
            );
            assert!(iv.width() <= 1e-11);
        }
    }

    #[test]
    fn double_root_is_kept() {
        // (x - 0.5)^2 touches zero without a sign change.
        let roots = isolate_roots(&[0.25, -1.0, 1.0], 0.0, 1.0, 1e-10);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].contains(0.5));
    }

    #[test]
    fn constants_have_no_isolated_roots() {
        assert!(isolate_roots(&[0.0, 0.0], 0.0, 1.0, 1e-9).is_empty());
        assert!(isolate_roots(&[3.0], 0.0, 1.0, 1e-9).is_empty());
    }

    #[test]
    fn range_of_a_parabola() {
        // 10 s (1 - s) * 10 = t (10 - t) with s = t / 10.
        let r = range(&[0.0, 100.0, -100.0], 0.0, 1.0, 1e-12);
        assert!(r.lo <= 0.0 && r.lo > -1e-9);
        assert!(r.hi >= 25.0 && r.hi < 25.0 + 1e-9);
    }

    #[test]
    fn single_precision_roots() {
        let roots = isolate_roots(&[-0.25f32, 1.0], 0.0, 1.0, 1e-6);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].contains(0.25));
    }

    proptest! {
        #[test]
        fn range_encloses_samples(c in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let r = range(&c, 0.0, 1.0, 1e-10);
            for k in 0..=200 {
                let v = eval(&c, k as f64 / 200.0);
                prop_assert!(r.lo <= v && v <= r.hi);
            }
        }

        #[test]
        fn sign_changes_fall_in_isolating_intervals(c in prop::collection::vec(-5.0f64..5.0, 2..8)) {
            let roots = isolate_roots(&c, 0.0, 1.0, 1e-10);
            let grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
            for w in grid.windows(2) {
                let (fa, fb) = (eval(&c, w[0]), eval(&c, w[1]));
                if fa * fb < 0.0 {
                    prop_assert!(roots.iter().any(|iv| iv.hi >= w[0] && iv.lo <= w[1]));
                }
            }
        }
    }
}
