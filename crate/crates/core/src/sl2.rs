//! The action of unimodular 2x2 matrices on heat-equation solutions and on
//! the `(h, r, x)` data of the ansatz.
//!
//! `Γ(M)ψ(z,t) = w^{-1/2} exp(-c z^2/(2w)) ψ(z/w, τ)` with `w = ct + d`,
//! `τ = (at + b)/w`. Composition follows `Γ(M_2)Γ(M_1) = Γ(M_1 M_2)`.

use num_traits::One;

use crate::algebra::{fmt_rational_pq, int, Rational, Scalar, UniPoly};
use crate::error::{Error, Result};
use crate::jetcalc::JetPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct Mobius<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Mobius<T> {
    /// Unchecked constructor; see [`Mobius::det`] and [`Mobius::validate`].
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    /// Checks `|ad - bc - 1| <= tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let gap = (self.det() - T::one()).as_f64().abs();
        if gap <= tol {
            Ok(())
        } else {
            Err(Error::NotUnimodular(self.det().to_text()))
        }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (e, f, g, h) = (&other.a, &other.b, &other.c, &other.d);
        Self::new(
            a.clone() * e.clone() + b.clone() * g.clone(),
            a.clone() * f.clone() + b.clone() * h.clone(),
            c.clone() * e.clone() + d.clone() * g.clone(),
            c.clone() * f.clone() + d.clone() * h.clone(),
        )
    }

    /// `ct + d`, refusing zero.
    pub fn denom(&self, t: &T) -> Result<T> {
        let w = self.c.clone() * t.clone() + self.d.clone();
        if w.is_zero() {
            Err(Error::PoleOfAction { t: t.as_f64() })
        } else {
            Ok(w)
        }
    }

    /// `(at + b)/(ct + d)`.
    pub fn apply(&self, t: &T) -> Result<T> {
        let w = self.denom(t)?;
        Ok((self.a.clone() * t.clone() + self.b.clone()) / w)
    }
}

impl Mobius<Rational> {
    /// Exact constructor requiring `ad - bc = 1`.
    pub fn unimodular(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        let m = Self::new(a, b, c, d);
        let det = m.det();
        if det.is_one() {
            Ok(m)
        } else {
            Err(Error::NotUnimodular(fmt_rational_pq(&det)))
        }
    }

    pub fn to_f64(&self) -> Mobius<f64> {
        Mobius::new(self.a.as_f64(), self.b.as_f64(), self.c.as_f64(), self.d.as_f64())
    }
}

/// `γ_1(M)h(t) = h(τ)/w^2 + c/w`.
pub fn act_on_h<T: Scalar>(m: &Mobius<T>, h: &dyn Fn(&T) -> Result<T>, t: &T) -> Result<T> {
    let w = m.denom(t)?;
    let tau = m.apply(t)?;
    Ok(h(&tau)? / (w.clone() * w.clone()) + m.c.clone() / w)
}

/// Value of `r̂` with a flag recording whether `w < 0` put the logarithm off the principal sheet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchValue {
    pub value: f64,
    pub branch_crossed: bool,
}

/// `γ_2(M) r(t) = r(τ) - (δ + 1/2) ln w`; for `w < 0` the real part is returned and the flag set.
pub fn act_on_r(m: &Mobius<f64>, r: &dyn Fn(f64) -> Result<f64>, delta: u8, t: f64) -> Result<BranchValue> {
    let w = m.denom(&t)?;
    let tau = m.apply(&t)?;
    let value = r(tau)? - (delta as f64 + 0.5) * w.abs().ln();
    Ok(BranchValue { value, branch_crossed: w < 0.0 })
}

/// `x̂_k(t) = x_k(τ)/w^{2k}`.
pub fn act_on_x<T: Scalar>(m: &Mobius<T>, x: &dyn Fn(&T) -> Result<T>, k: usize, t: &T) -> Result<T> {
    let w = m.denom(t)?;
    let tau = m.apply(t)?;
    Ok(x(&tau)? / w.pow_u(2 * k as u32))
}

/// `Γ(M)ψ(z,t)`; requires `w > 0` so the square root stays real.
pub fn act_on_psi(m: &Mobius<f64>, psi: &dyn Fn(f64, f64) -> Result<f64>, z: f64, t: f64) -> Result<f64> {
    let w = m.denom(&t)?;
    if w < 0.0 {
        return Err(Error::InvalidArgument(format!("ct + d = {w} is negative")));
    }
    let tau = m.apply(&t)?;
    Ok(w.powf(-0.5) * (-m.c * z * z / (2.0 * w)).exp() * psi(z / w, tau)?)
}

/// Derivatives `d^q/dt^q (γ_1 h)` for `q = 0..=order` as polynomials in the jet
/// `h^(j)(τ)` with coefficients polynomial in `u = 1/(ct + d)`.
///
/// Uses `du/dt = -c u^2` and `d/dt h^(j)(τ) = h^(j+1)(τ) u^2`.
pub fn gamma1_jet_template(c: &Rational, order: usize) -> Vec<JetPoly<UniPoly>> {
    let u2 = UniPoly::monomial(int(1), 2);
    let du = UniPoly::monomial(-c.clone(), 2);
    let start = JetPoly::term(u2.clone(), crate::jetcalc::JetMonomial::var(0))
        .add(&JetPoly::constant(UniPoly::monomial(c.clone(), 1)));
    let mut out = vec![start];
    for _ in 0..order {
        let p = out.last().expect("nonempty");
        let chain = p.total_derivative().mul_coeff(&u2);
        let mut coef_part = JetPoly::zero();
        for (m, f) in p.terms() {
            coef_part = coef_part.add(&JetPoly::term(f.derivative() * du.clone(), m.clone()));
        }
        out.push(chain.add(&coef_part));
    }
    out
}

/// Jet of `γ_1(M)h` at `t`, given the jet of `h` at `τ`.
pub fn transformed_jet(m: &Mobius<Rational>, jet_at_tau: &[Rational], t: &Rational, order: usize) -> Result<Vec<Rational>> {
    let u = m.denom(t)?.recip();
    gamma1_jet_template(&m.c, order)
        .iter()
        .map(|p| p.at(&u).eval(jet_at_tau))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::dynsys::{eval_rational_h, RationalH};
    use crate::jetcalc::{build_d_family, build_dn};

    fn inv_t() -> Mobius<Rational> {
        Mobius::unimodular(int(0), int(-1), int(1), int(0)).unwrap()
    }

    #[test]
    fn unimodularity_enforced() {
        assert!(Mobius::unimodular(int(2), int(0), int(0), int(1)).is_err());
        assert!(Mobius::new(2.0, 0.0, 0.0, 0.5).validate(1e-14).is_ok());
    }

    #[test]
    fn h_examples() {
        let zero = |_: &Rational| Ok(int(0));
        assert_eq!(act_on_h(&inv_t(), &zero, &int(3)).unwrap(), rat(1, 3));
        let h = |s: &Rational| Ok(s.clone() * s.clone());
        let id = Mobius::<Rational>::identity();
        assert_eq!(act_on_h(&id, &h, &rat(2, 7)).unwrap(), rat(4, 49));
        assert!(matches!(act_on_h(&inv_t(), &zero, &int(0)), Err(Error::PoleOfAction { .. })));
    }

    #[test]
    fn h_group_law() {
        let m1 = Mobius::unimodular(int(2), int(1), int(3), int(2)).unwrap();
        let m2 = Mobius::unimodular(int(1), int(-2), int(1), int(-1)).unwrap();
        let h = |s: &Rational| Ok((s.clone() - int(5)).recip() + s.clone());
        let t = rat(7, 3);
        let inner = |s: &Rational| act_on_h(&m1, &h, s);
        let lhs = act_on_h(&m2, &inner, &t).unwrap();
        let rhs = act_on_h(&m1.compose(&m2), &h, &t).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn r_and_x_examples() {
        let m = inv_t().to_f64();
        let r = act_on_r(&m, &|_| Ok(0.0), 0, 4.0).unwrap();
        assert!((r.value + 0.5 * 4f64.ln()).abs() < 1e-15);
        assert!(!r.branch_crossed);
        let r1 = act_on_r(&m, &|_| Ok(0.0), 1, 4.0).unwrap();
        assert!((r1.value + 1.5 * 4f64.ln()).abs() < 1e-15);

        let s = rat(3, 2);
        let scale = Mobius::unimodular(s.clone(), int(0), int(0), s.recip()).unwrap();
        let x = |u: &Rational| Ok(u.clone() * u.clone() + int(1));
        let t = rat(2, 5);
        for k in [2usize, 3] {
            let expected = s.clone().pow(2 * k as i32) * x(&(s.clone() * s.clone() * t.clone())).unwrap();
            assert_eq!(act_on_x(&scale, &x, k, &t).unwrap(), expected);
        }
    }

    #[test]
    fn psi_of_constant_is_fundamental_solution() {
        let m = inv_t().to_f64();
        let one = |_: f64, _: f64| Ok(1.0);
        let (z, t) = (0.7, 1.3);
        let v = act_on_psi(&m, &one, z, t).unwrap();
        assert!((v - t.powf(-0.5) * (-z * z / (2.0 * t)).exp()).abs() < 1e-15);
    }

    #[test]
    fn template_matches_direct_derivative() {
        // n = 0 rational solution h = 1/(t - a); γ_1 h is again of that form
        let m = Mobius::unimodular(int(2), int(1), int(1), int(1)).unwrap();
        let rh = RationalH::new(int(1), vec![rat(1, 2)]).unwrap();
        let t = rat(3, 4);
        let tau = m.apply(&t).unwrap();
        let jet = eval_rational_h(&rh, &tau, 3).unwrap();
        let out = transformed_jet(&m, &jet, &t, 3).unwrap();
        assert_eq!(build_dn(1).eval(&out).unwrap(), int(0));
        let fam = build_d_family(1, &crate::algebra::GradedPoly::zero()).unwrap();
        let rh2 = RationalH::new(int(2), vec![rat(1, 2), int(-3)]).unwrap();
        let jet2 = eval_rational_h(&rh2, &tau, 3).unwrap();
        assert_eq!(fam.eval(&transformed_jet(&m, &jet2, &t, 3).unwrap()).unwrap(), int(0));
    }
}
