//! Dense LU factorization with partial pivoting for the small working-set
//! matrices of the simplex solver.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct Lu<T> {
    n: usize,
    /// Packed L (unit diagonal, below) and U (on and above the diagonal).
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Factors the row-major `n x n` matrix. Returns `None` when a pivot
    /// falls below `tiny` times the largest entry of its column.
    pub(crate) fn factor(mut a: Vec<T>, n: usize, tiny: T) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::min_positive_value());
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].abs());
            for r in k + 1..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= tiny * scale {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / pivot;
                a[r * n + k] = f;
                if f != T::zero() {
                    for c in k + 1..n {
                        let u = a[k * n + c];
                        a[r * n + c] -= f * u;
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    /// Solves `A x = b` in place.
    pub(crate) fn solve(&self, b: &mut [T]) {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = y[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * y[c];
            }
            y[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = y[r];
            for c in r + 1..n {
                acc -= self.lu[r * n + c] * y[c];
            }
            y[r] = acc / self.lu[r * n + r];
        }
        b.copy_from_slice(&y);
    }

    /// Solves `A^T x = b` in place.
    pub(crate) fn solve_transpose(&self, b: &mut [T]) {
        let n = self.n;
        // A = P^T L U, so A^T x = b  <=>  U^T L^T (P x) = b.
        let mut z = b.to_vec();
        for r in 0..n {
            let mut acc = z[r];
            for c in 0..r {
                acc -= self.lu[c * n + r] * z[c];
            }
            z[r] = acc / self.lu[r * n + r];
        }
        for r in (0..n).rev() {
            let mut acc = z[r];
            for c in r + 1..n {
                acc -= self.lu[c * n + r] * z[c];
            }
            z[r] = acc;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = z[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(a: &[f64], x: &[f64], n: usize, transpose: bool) -> Vec<f64> {
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| if transpose { a[c * n + r] } else { a[r * n + c] } * x[c])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn solves_both_systems() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = Lu::factor(a.clone(), 3, 1e-14).unwrap();
        let b = [1.0, -2.0, 0.5];
        let mut x = b;
        lu.solve(&mut x);
        for (got, want) in matvec(&a, &x, 3, false).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut y = b;
        lu.solve_transpose(&mut y);
        for (got, want) in matvec(&a, &y, 3, true).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_singular() {
        assert!(Lu::factor(vec![1.0, 2.0, 2.0, 4.0], 2, 1e-12).is_none());
    }
}
