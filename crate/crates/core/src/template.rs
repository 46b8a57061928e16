//! Linearly parameterized model templates `w(c, x0, t) = sum_l c_l phi_l(x0, t)`.
//!
//! Polynomial bases are expressed in the scaled time `s = t / T` so that
//! high-degree monomials stay within `[0, 1]` on the horizon. Monomials are
//! ordered graded-lexicographically over `(x0_1, ..., x0_n, s)`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Exponents of one monomial `x0_1^a_1 ... x0_n^a_n s^b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub input_exponents: Vec<u32>,
    pub time_exponent: u32,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.input_exponents.iter().sum::<u32>() + self.time_exponent
    }

    pub fn is_time_only(&self) -> bool {
        self.input_exponents.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, &e) in self.input_exponents.iter().enumerate() {
            if e > 0 {
                if wrote {
                    f.write_str("*")?;
                }
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        if self.time_exponent > 0 {
            if wrote {
                f.write_str("*")?;
            }
            f.write_str("s")?;
            if self.time_exponent > 1 {
                write!(f, "^{}", self.time_exponent)?;
            }
            wrote = true;
        }
        if !wrote {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// All exponent vectors over `vars` variables with total degree `<= degree`,
/// graded, then lexicographically descending within a degree.
pub fn graded_lex_exponents(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(vars: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            fill(vars, remaining - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars == 0 {
        out.push(Vec::new());
        return out;
    }
    for total in 0..=degree {
        fill(vars, total, &mut Vec::with_capacity(vars), &mut out);
    }
    out
}

/// `C(n + 1 + d, d)`: number of monomials in `n` inputs and time of degree
/// at most `d`.
pub fn input_time_basis_size(n: usize, degree: u32) -> usize {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 1..=degree as u128 {
        num *= n as u128 + 1 + i;
        den *= i;
    }
    (num / den) as usize
}

/// A user-supplied basis function of `(x0, t)` with `t` unscaled.
#[derive(Clone)]
pub struct CustomBasis {
    pub name: String,
    pub f: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
}

impl CustomBasis {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomBasis")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Basis {
    Polynomial(Vec<Monomial>),
    /// A fully evaluated model whose single coefficient is fixed at one.
    Frozen {
        inner: Box<ModelTemplate>,
        coefficients: Vec<f64>,
    },
    Custom(Vec<CustomBasis>),
}

#[derive(Debug, Clone)]
pub struct ModelTemplate {
    basis: Basis,
    input_dimension: usize,
    /// Horizon `T` used to scale time; `s = t / time_scale`.
    time_scale: f64,
    description: String,
}

fn check_scale(time_scale: f64) -> Result<()> {
    if time_scale > 0.0 && time_scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "time scale must be positive, got {time_scale}"
        )))
    }
}

/// Polynomial in `t` alone: basis `{1, s, ..., s^degree}` with `s = t / horizon`.
pub fn poly_time_template(degree: u32, horizon: f64) -> Result<ModelTemplate> {
    check_scale(horizon)?;
    let monomials = (0..=degree)
        .map(|e| Monomial {
            input_exponents: Vec::new(),
            time_exponent: e,
        })
        .collect();
    Ok(ModelTemplate {
        basis: Basis::Polynomial(monomials),
        input_dimension: 0,
        time_scale: horizon,
        description: format!("poly_time(degree={degree}; basis=s^j; s=t/{horizon})"),
    })
}

/// All monomials in `(x0_1, ..., x0_n, s)` of total degree at most `degree`.
pub fn poly_input_time_template(n: usize, degree: u32, horizon: f64) -> Result<ModelTemplate> {
    check_scale(horizon)?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "input-dependent template needs n >= 1".into(),
        ));
    }
    let monomials = graded_lex_exponents(n + 1, degree)
        .into_iter()
        .map(|mut e| {
            let time_exponent = e.pop().expect("n + 1 variables");
            Monomial {
                input_exponents: e,
                time_exponent,
            }
        })
        .collect();
    Ok(ModelTemplate {
        basis: Basis::Polynomial(monomials),
        input_dimension: n,
        time_scale: horizon,
        description: format!(
            "poly_input_time(n={n}, degree={degree}; order=grlex(x0_1..x0_{n},s); s=t/{horizon})"
        ),
    })
}

/// Template over user basis functions; verification falls back to grids.
pub fn custom_template(
    functions: Vec<CustomBasis>,
    input_dimension: usize,
    horizon: f64,
) -> Result<ModelTemplate> {
    check_scale(horizon)?;
    if functions.is_empty() {
        return Err(Error::InvalidArgument(
            "template needs at least one basis function".into(),
        ));
    }
    let names: Vec<&str> = functions.iter().map(|f| f.name.as_str()).collect();
    let description = format!(
        "custom(n={input_dimension}; basis=[{}]; non-polynomial)",
        names.join(", ")
    );
    Ok(ModelTemplate {
        basis: Basis::Custom(functions),
        input_dimension,
        time_scale: horizon,
        description,
    })
}

/// Fixes the coefficients of `template`, leaving a single basis function
/// (the evaluated model) whose coefficient is pinned to one.
pub fn freeze(template: &ModelTemplate, coefficients: &[f64]) -> Result<ModelTemplate> {
    template.check_coefficients(coefficients)?;
    Ok(ModelTemplate {
        description: format!("frozen({})", template.description),
        input_dimension: template.input_dimension,
        time_scale: template.time_scale,
        basis: Basis::Frozen {
            inner: Box::new(template.clone()),
            coefficients: coefficients.to_vec(),
        },
    })
}

impl ModelTemplate {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Number of basis functions `k`.
    pub fn len(&self) -> usize {
        match &self.basis {
            Basis::Polynomial(m) => m.len(),
            Basis::Frozen { .. } => 1,
            Basis::Custom(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dimension(&self) -> usize {
        self.input_dimension
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_frozen(&self) -> bool {
        matches!(self.basis, Basis::Frozen { .. })
    }

    /// Coefficients that enter the LP as decision variables.
    pub fn free_coefficients(&self) -> usize {
        if self.is_frozen() {
            0
        } else {
            self.len()
        }
    }

    /// LP variable count: free coefficients plus the tube half-width.
    pub fn decision_dims(&self) -> usize {
        self.free_coefficients() + 1
    }

    pub fn is_polynomial(&self) -> bool {
        match &self.basis {
            Basis::Polynomial(_) => true,
            Basis::Frozen { inner, .. } => inner.is_polynomial(),
            Basis::Custom(_) => false,
        }
    }

    /// True when the model value does not depend on `x0`.
    pub fn is_input_independent(&self) -> bool {
        match &self.basis {
            Basis::Polynomial(m) => m.iter().all(Monomial::is_time_only),
            Basis::Frozen { inner, .. } => inner.is_input_independent(),
            Basis::Custom(_) => self.input_dimension == 0,
        }
    }

    /// Box bound on each coefficient for an original-time bound `uc`.
    ///
    /// A coefficient of `s^j` equals `T^j` times the matching coefficient in
    /// `t`, so the bound scales the same way. Frozen coefficients are pinned
    /// to `[1, 1]`.
    pub fn coefficient_bounds(&self, uc: f64) -> Vec<(f64, f64)> {
        match &self.basis {
            Basis::Polynomial(m) => m
                .iter()
                .map(|mono| {
                    let b = uc * self.time_scale.powi(mono.time_exponent as i32);
                    (-b, b)
                })
                .collect(),
            Basis::Frozen { .. } => vec![(1.0, 1.0)],
            Basis::Custom(f) => vec![(-uc, uc); f.len()],
        }
    }

    pub fn check_coefficients(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.len() {
            return Err(Error::Contract(format!(
                "template has {} basis functions but {} coefficients were given",
                self.len(),
                c.len()
            )));
        }
        Ok(())
    }

    fn check_input(&self, x0: &[f64]) -> Result<()> {
        if self.input_dimension > 0 && x0.len() != self.input_dimension {
            return Err(Error::Contract(format!(
                "template expects inputs of dimension {}, got {}",
                self.input_dimension,
                x0.len()
            )));
        }
        Ok(())
    }

    /// Writes `phi_l(x0, t)` for every basis function into `out`.
    pub fn basis_values(&self, x0: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        self.check_input(x0)?;
        if out.len() != self.len() {
            return Err(Error::Contract(format!(
                "output buffer has length {}, expected {}",
                out.len(),
                self.len()
            )));
        }
        match &self.basis {
            Basis::Polynomial(monomials) => {
                let s = t / self.time_scale;
                let max_deg = monomials.iter().map(Monomial::degree).max().unwrap_or(0) as usize;
                let powers = PowerTable::new(x0, s, max_deg, self.input_dimension);
                for (o, mono) in out.iter_mut().zip(monomials) {
                    *o = powers.monomial(mono);
                }
            }
            Basis::Frozen {
                inner,
                coefficients,
            } => {
                out[0] = inner.evaluate(coefficients, x0, t)?;
            }
            Basis::Custom(functions) => {
                for (o, f) in out.iter_mut().zip(functions) {
                    *o = (f.f)(x0, t);
                }
            }
        }
        Ok(())
    }

    pub fn basis_vector(&self, x0: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.basis_values(x0, t, &mut out)?;
        Ok(out)
    }

    /// `sum_l c_l phi_l(x0, t)`, accumulated in basis order.
    pub fn evaluate(&self, c: &[f64], x0: &[f64], t: f64) -> Result<f64> {
        self.check_coefficients(c)?;
        let phi = self.basis_vector(x0, t)?;
        Ok(c.iter().zip(&phi).fold(0.0, |acc, (ci, p)| acc + ci * p))
    }

    /// The model as explicit polynomial terms `(monomial, coefficient)` in
    /// the scaled time, or `None` for non-polynomial templates.
    pub fn polynomial_terms(&self, c: &[f64]) -> Option<Vec<(Monomial, f64)>> {
        if c.len() != self.len() {
            return None;
        }
        match &self.basis {
            Basis::Polynomial(m) => Some(m.iter().cloned().zip(c.iter().copied()).collect()),
            Basis::Frozen {
                inner,
                coefficients,
            } => inner
                .polynomial_terms(coefficients)
                .map(|terms| terms.into_iter().map(|(m, v)| (m, v * c[0])).collect()),
            Basis::Custom(_) => None,
        }
    }

    /// Coefficients of the scaled-time polynomial `sum_j a_j s^j` for an
    /// input-independent polynomial model (or for a fixed `x0`).
    pub fn univariate_in_s(&self, c: &[f64], x0: Option<&[f64]>) -> Option<Vec<f64>> {
        let terms = self.polynomial_terms(c)?;
        let max_j = terms
            .iter()
            .map(|(m, _)| m.time_exponent)
            .max()
            .unwrap_or(0) as usize;
        let mut coeffs = vec![0.0; max_j + 1];
        for (mono, v) in terms {
            let factor = if mono.is_time_only() {
                1.0
            } else {
                let x = x0?;
                mono.input_exponents
                    .iter()
                    .zip(x)
                    .fold(1.0, |acc, (&e, &xi)| acc * pow_by_multiplication(xi, e))
            };
            coeffs[mono.time_exponent as usize] += v * factor;
        }
        Some(coeffs)
    }
}

fn pow_by_multiplication(x: f64, e: u32) -> f64 {
    (0..e).fold(1.0, |acc, _| acc * x)
}

/// Powers `v^0..v^max_deg` of every variable, built by repeated
/// multiplication.
struct PowerTable {
    stride: usize,
    table: Vec<f64>,
    vars: usize,
}

impl PowerTable {
    fn new(x0: &[f64], s: f64, max_deg: usize, n: usize) -> Self {
        let stride = max_deg + 1;
        let vars = n + 1;
        let mut table = vec![1.0; vars * stride];
        for v in 0..vars {
            let base = if v < n { x0[v] } else { s };
            for e in 1..stride {
                table[v * stride + e] = table[v * stride + e - 1] * base;
            }
        }
        Self {
            stride,
            table,
            vars,
        }
    }

    fn monomial(&self, m: &Monomial) -> f64 {
        let mut value = 1.0;
        for (v, &e) in m.input_exponents.iter().enumerate() {
            value *= self.table[v * self.stride + e as usize];
        }
        value * self.table[(self.vars - 1) * self.stride + m.time_exponent as usize]
    }
}

/// Template grammar used in configuration files.
#[derive(Debug, Clone, PartialEq)]
pub enum TemplateSpec {
    PolyTime { degree: u32 },
    PolyInputTime { degree: u32 },
    Frozen(PathBuf),
}

impl TemplateSpec {
    /// Instantiates polynomial specs; frozen specs need a model file and are
    /// resolved by the model loader.
    pub fn build_polynomial(&self, input_dimension: usize, horizon: f64) -> Result<ModelTemplate> {
        match self {
            TemplateSpec::PolyTime { degree } => poly_time_template(*degree, horizon),
            TemplateSpec::PolyInputTime { degree } => {
                poly_input_time_template(input_dimension, *degree, horizon)
            }
            TemplateSpec::Frozen(path) => Err(Error::Config(format!(
                "frozen template `{}` must be loaded from its model file",
                path.display()
            ))),
        }
    }
}

impl fmt::Display for TemplateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateSpec::PolyTime { degree } => write!(f, "poly_time(degree={degree})"),
            TemplateSpec::PolyInputTime { degree } => write!(f, "poly_input_time(degree={degree})"),
            TemplateSpec::Frozen(p) => write!(f, "frozen({})", p.display()),
        }
    }
}

impl FromStr for TemplateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse template `{s}`"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let arg = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        let degree = || -> Result<u32> {
            let value = arg
                .strip_prefix("degree")
                .map(str::trim_start)
                .and_then(|a| a.strip_prefix('='))
                .ok_or_else(bad)?;
            value.trim().parse().map_err(|_| bad())
        };
        match name.trim() {
            "poly_time" => Ok(TemplateSpec::PolyTime { degree: degree()? }),
            "poly_input_time" => Ok(TemplateSpec::PolyInputTime { degree: degree()? }),
            "frozen" if !arg.is_empty() => Ok(TemplateSpec::Frozen(PathBuf::from(arg))),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn poly_time_sizes() {
        let t6 = poly_time_template(6, 10.0).unwrap();
        assert_eq!((t6.len(), t6.decision_dims()), (7, 8));
        let t2 = poly_time_template(2, 10.0).unwrap();
        assert_eq!((t2.len(), t2.decision_dims()), (3, 4));
        let t0 = poly_time_template(0, 10.0).unwrap();
        assert_eq!(t0.evaluate(&[3.5], &[], 7.0).unwrap(), 3.5);
        assert!(t6.is_input_independent());
    }

    #[test]
    fn poly_input_time_sizes() {
        assert_eq!(
            poly_input_time_template(2, 6, 10.0)
                .unwrap()
                .decision_dims(),
            85
        );
        assert_eq!(poly_input_time_template(2, 0, 10.0).unwrap().len(), 1);
        assert_eq!(
            poly_input_time_template(2, 4, 10.0)
                .unwrap()
                .decision_dims(),
            36
        );
        assert!(poly_input_time_template(0, 2, 1.0).is_err());
    }

    #[test]
    fn basis_count_matches_closed_form() {
        for n in 1..=9 {
            for d in 0..=6 {
                let t = poly_input_time_template(n, d, 1.0).unwrap();
                assert_eq!(t.len(), input_time_basis_size(n, d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn graded_lex_order() {
        let e = graded_lex_exponents(2, 2);
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn evaluation_examples() {
        // Unit time scale keeps s = t.
        let t1 = poly_time_template(1, 1.0).unwrap();
        assert_eq!(t1.evaluate(&[2.0, 3.0], &[], 4.0).unwrap(), 14.0);

        let tx = poly_input_time_template(2, 1, 1.0).unwrap();
        // Order: 1, x1, x2, s
        assert_eq!(
            tx.basis_vector(&[5.0, 0.0], 1.0).unwrap(),
            vec![1.0, 5.0, 0.0, 1.0]
        );
        assert_eq!(
            tx.evaluate(&[0.0, 1.0, 0.0, 2.0], &[5.0, 0.0], 1.0)
                .unwrap(),
            7.0
        );
        assert_eq!(tx.evaluate(&[0.0; 4], &[5.0, 3.0], 0.3).unwrap(), 0.0);
        assert!(tx.evaluate(&[1.0; 3], &[5.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn time_is_scaled_by_horizon() {
        let t = poly_time_template(2, 10.0).unwrap();
        assert_eq!(t.basis_vector(&[], 5.0).unwrap(), vec![1.0, 0.5, 0.25]);
        assert_eq!(
            t.coefficient_bounds(100.0),
            vec![(-100.0, 100.0), (-1e3, 1e3), (-1e4, 1e4)]
        );
    }

    #[test]
    fn freezing_preserves_values() {
        let t = poly_input_time_template(2, 2, 10.0).unwrap();
        let c: Vec<f64> = (0..t.len()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let frozen = freeze(&t, &c).unwrap();
        assert_eq!(frozen.len(), 1);
        assert_eq!(frozen.decision_dims(), 1);
        assert_eq!(
            crate::pac::min_samples(0.1, 1e-10, frozen.decision_dims()).unwrap(),
            481
        );
        let x = [1.2, -0.4];
        let direct = t.evaluate(&c, &x, 3.3).unwrap();
        assert_eq!(frozen.evaluate(&[1.0], &x, 3.3).unwrap(), direct);
        let twice = freeze(&frozen, &[1.0]).unwrap();
        assert_eq!(twice.evaluate(&[1.0], &x, 3.3).unwrap(), direct);
        assert!(freeze(&t, &c[1..]).is_err());
        assert!(frozen.is_polynomial());
    }

    #[test]
    fn univariate_projection() {
        let t = poly_input_time_template(1, 2, 1.0).unwrap();
        // Order: 1, x, s, x^2, x s, s^2
        let c = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = t.univariate_in_s(&c, Some(&[2.0])).unwrap();
        // 1 + 4 + 16 = 21; s: 3 + 10 = 13; s^2: 6
        assert_eq!(p, vec![21.0, 13.0, 6.0]);
        assert!(t.univariate_in_s(&c, None).is_none());
    }

    #[test]
    fn custom_basis_is_flagged() {
        let t = custom_template(
            vec![
                CustomBasis::new("x1*t", |x, t| x[0] * t),
                CustomBasis::new("exp(x1*x2)", |x, _| (x[0] * x[1]).exp()),
            ],
            2,
            1.0,
        )
        .unwrap();
        assert!(!t.is_polynomial());
        assert_eq!(t.evaluate(&[1.0, 0.0], &[2.0, 0.5], 3.0).unwrap(), 6.0);
    }

    #[test]
    fn template_spec_grammar() {
        assert_eq!(
            "poly_time(degree=6)".parse::<TemplateSpec>().unwrap(),
            TemplateSpec::PolyTime { degree: 6 }
        );
        assert_eq!(
            "poly_input_time( degree = 4 )"
                .parse::<TemplateSpec>()
                .unwrap(),
            TemplateSpec::PolyInputTime { degree: 4 }
        );
        assert_eq!(
            "frozen(out/model.toml)".parse::<TemplateSpec>().unwrap(),
            TemplateSpec::Frozen("out/model.toml".into())
        );
        assert!("poly_time(6)".parse::<TemplateSpec>().is_err());
        assert!("spline(degree=3)".parse::<TemplateSpec>().is_err());
    }

    proptest! {
        #[test]
        fn linear_in_coefficients(
            a in -5.0f64..5.0, b in -5.0f64..5.0,
            c in proptest::collection::vec(-10.0f64..10.0, 10),
            d in proptest::collection::vec(-10.0f64..10.0, 10),
            x in proptest::collection::vec(-2.0f64..2.0, 2),
            t in 0.0f64..10.0,
        ) {
            let tpl = poly_input_time_template(2, 2, 10.0).unwrap();
            let combo: Vec<f64> = c.iter().zip(&d).map(|(ci, di)| a * ci + b * di).collect();
            let lhs = tpl.evaluate(&combo, &x, t).unwrap();
            let rhs = a * tpl.evaluate(&c, &x, t).unwrap() + b * tpl.evaluate(&d, &x, t).unwrap();
            let scale = 1.0 + lhs.abs().max(rhs.abs()) + a.abs() * 50.0 + b.abs() * 50.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn evaluation_is_deterministic(c in proptest::collection::vec(-10.0f64..10.0, 7), t in 0.0f64..10.0) {
            let tpl = poly_time_template(6, 10.0).unwrap();
            prop_assert_eq!(
                tpl.evaluate(&c, &[], t).unwrap().to_bits(),
                tpl.evaluate(&c, &[], t).unwrap().to_bits()
            );
        }
    }
}
