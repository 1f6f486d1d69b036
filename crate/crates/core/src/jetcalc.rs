//! Differential polynomials in the jet variables `h, h', h'', ...`.
//!
//! `h^(q)` carries grading degree `-4 - 4q`; we track the positive weight
//! `q + 1` per factor so that a homogeneous polynomial of degree `-4w` has
//! weight `w`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::algebra::{
    check_in_vn, factorial, int, push_term, solve_linear, vn_basis, Coefficient, GradedPoly, Rational, Scalar, UniPoly,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct JetMonomial {
    exps: Vec<u32>,
}

impl JetMonomial {
    pub fn one() -> Self {
        JetMonomial::default()
    }

    /// The single variable `h^(q)`.
    pub fn var(q: usize) -> Self {
        Self::from_pairs(&[(q, 1)])
    }

    pub fn from_pairs(pairs: &[(usize, u32)]) -> Self {
        let mut exps = Vec::new();
        for &(q, e) in pairs {
            if exps.len() <= q {
                exps.resize(q + 1, 0);
            }
            exps[q] += e;
        }
        Self::trimmed(exps)
    }

    fn trimmed(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        JetMonomial { exps }
    }

    pub fn exponent(&self, q: usize) -> u32 {
        self.exps.get(q).copied().unwrap_or(0)
    }

    /// Highest derivative order present.
    pub fn order(&self) -> Option<usize> {
        self.exps.len().checked_sub(1)
    }

    pub fn weight(&self) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .map(|(q, &e)| (q as u32 + 1) * e)
            .sum()
    }

    pub fn degree(&self) -> i64 {
        -4 * self.weight() as i64
    }

    /// Number of jet factors counted with multiplicity.
    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.exps.len().max(other.exps.len());
        Self::trimmed((0..n).map(|q| self.exponent(q) + other.exponent(q)).collect())
    }

    pub fn div_var(&self, q: usize) -> Option<Self> {
        if self.exponent(q) == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[q] -= 1;
        Some(Self::trimmed(exps))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(q, &e)| (q, e))
    }

    pub fn eval<T: Scalar>(&self, jet: &[T]) -> T {
        self.iter()
            .fold(T::one(), |acc, (q, e)| acc * jet[q].pow_u(e))
    }

    pub fn to_string_in(&self, var: &str) -> String {
        self.iter()
            .map(|(q, e)| {
                let v = jet_var_name(var, q);
                if e == 1 {
                    v
                } else {
                    format!("{v}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// `h`, `h'`, ..., `h''''`, then `h^(5)`, ...
pub fn jet_var_name(var: &str, q: usize) -> String {
    if q <= 4 {
        format!("{var}{}", "'".repeat(q))
    } else {
        format!("{var}^({q})")
    }
}

impl Ord for JetMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exps
            .len()
            .cmp(&other.exps.len())
            .then_with(|| self.exps.iter().rev().cmp(other.exps.iter().rev()))
    }
}

impl PartialOrd for JetMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Differential polynomial with coefficients in `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoly<C = Rational> {
    terms: BTreeMap<JetMonomial, C>,
}

impl<C: Coefficient> Default for JetPoly<C> {
    fn default() -> Self {
        JetPoly { terms: BTreeMap::new() }
    }
}

impl<C: Coefficient> JetPoly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(c: C, m: JetMonomial) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, JetMonomial::one())
    }

    /// `h^(q)`.
    pub fn var(q: usize) -> Self {
        Self::term(C::one(), JetMonomial::var(q))
    }

    fn add_term(&mut self, m: JetMonomial, c: C) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(C::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &JetMonomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Highest derivative order appearing.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().filter_map(JetMonomial::order).max()
    }

    /// Common weight of all terms; `Ok(None)` for zero.
    pub fn weight(&self) -> Result<Option<u32>> {
        let mut weights = self.terms.keys().map(JetMonomial::weight);
        let Some(w) = weights.next() else {
            return Ok(None);
        };
        if weights.all(|v| v == w) {
            Ok(Some(w))
        } else {
            Err(Error::Inhomogeneous)
        }
    }

    pub fn degree(&self) -> Result<Option<i64>> {
        Ok(self.weight()?.map(|w| -4 * w as i64))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        JetPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(C::one()), |acc, _| acc.mul(self))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.scale(r));
        }
        out
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * k.clone());
        }
        out
    }

    /// Partial derivative with respect to the jet variable `h^(q)`.
    pub fn partial(&self, q: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some(d) = m.div_var(q) {
                out.add_term(d, c.scale(&int(m.exponent(q) as i64)));
            }
        }
        out
    }

    /// `d/dt`: `sum_q dP/dh^(q) * h^(q+1)`.
    pub fn total_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (q, e) in m.iter() {
                let reduced = m.div_var(q).expect("exponent is positive");
                out.add_term(reduced.mul(&JetMonomial::var(q + 1)), c.scale(&int(e as i64)));
            }
        }
        out
    }

    /// `(d/dt + m h) P`.
    pub fn shifted_derivative(&self, m: i64) -> Self {
        self.total_derivative()
            .add(&Self::var(0).mul(self).scale(&int(m)))
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> JetPoly<D> {
        let mut out = JetPoly::<D>::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Substitutes `h = y / lambda` (so `h^(q) = y^(q) / lambda`).
    pub fn substitute_scaled(&self, lambda: &Rational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::ZeroScale);
        }
        let inv = lambda.recip();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let factor = (0..m.total_degree()).fold(int(1), |acc, _| acc * &inv);
            out.add_term(m.clone(), c.scale(&factor));
        }
        Ok(out)
    }

    fn write_with(&self, var: &str, coeff: impl Fn(&C) -> (Rational, Option<String>)) -> String {
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let body = m.to_string_in(var);
            match coeff(c) {
                (r, None) => push_term(&mut out, &r, &body),
                (_, Some(text)) => {
                    if !out.is_empty() {
                        out.push_str(" + ");
                    }
                    if body.is_empty() {
                        out.push_str(&format!("({text})"));
                    } else {
                        out.push_str(&format!("({text})*{body}"));
                    }
                }
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

impl JetPoly<Rational> {
    /// Evaluates at a jet `(h, h', ..., h^(m))`.
    pub fn eval<T: Scalar>(&self, jet: &[T]) -> Result<T> {
        let need = self.order().map_or(0, |q| q + 1);
        if jet.len() < need {
            return Err(Error::JetTooShort { have: jet.len(), need });
        }
        Ok(self
            .terms
            .iter()
            .fold(T::zero(), |acc, (m, c)| acc + T::from_rat(c) * m.eval(jet)))
    }

    pub fn to_string_in(&self, var: &str) -> String {
        self.write_with(var, |c| (c.clone(), None))
    }

    /// `(exponent map, "p/q")` pairs in print order.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let exps: BTreeMap<String, u32> =
                    m.iter().map(|(q, e)| (q.to_string(), e)).collect();
                serde_json::json!([exps, crate::algebra::fmt_rational_pq(c)])
            })
            .collect();
        serde_json::Value::Array(terms)
    }
}

impl fmt::Display for JetPoly<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("h"))
    }
}

impl JetPoly<UniPoly> {
    /// Fixes the parameter to a value.
    pub fn at(&self, b: &Rational) -> JetPoly<Rational> {
        self.map_coeffs(|c| c.eval(b))
    }

    pub fn to_string_in(&self, var: &str, param: &str) -> String {
        self.write_with(var, |c| match c.degree() {
            Some(0) | None => (c.coeff(0), None),
            _ => (int(0), Some(c.to_string_in(param))),
        })
    }
}

impl fmt::Display for JetPoly<UniPoly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("h", "b"))
    }
}

fn dn_memo() -> &'static Mutex<Vec<JetPoly>> {
    static MEMO: OnceLock<Mutex<Vec<JetPoly>>> = OnceLock::new();
    MEMO.get_or_init(|| {
        let d1 = JetPoly::var(1).add(&JetPoly::var(0).pow(2));
        Mutex::new(vec![d1])
    })
}

/// `D_n(h)`: `D_1 = h' + h^2`, `D_n = (d/dt + 2n h) D_{n-1}`.
///
/// Panics if `n == 0`.
pub fn build_dn(n: usize) -> JetPoly {
    assert!(n >= 1, "D_n is defined for n >= 1");
    let mut memo = dn_memo().lock().unwrap_or_else(|e| e.into_inner());
    while memo.len() < n {
        let k = memo.len() + 1;
        let next = memo[k - 2].shifted_derivative(2 * k as i64);
        memo.push(next);
    }
    memo[n - 1].clone()
}

/// `(d/dt + m h) P`.
pub fn apply_shifted_derivative(p: &JetPoly, m: i64) -> JetPoly {
    p.shifted_derivative(m)
}

/// Substitutes `x_k -> D_{k-1}(h)` into a graded polynomial.
pub fn graded_on_dn(p: &GradedPoly) -> JetPoly {
    let mut out = JetPoly::zero();
    for (m, c) in p.terms() {
        let mut t = JetPoly::constant(c.clone());
        for (k, e) in m.iter() {
            assert!(k >= 2, "x_{k} has no jet image");
            t = t.mul(&build_dn(k - 1).pow(e));
        }
        out = out.add(&t);
    }
    out
}

/// `D_{P_n,n+1}(h) = D_{n+1}(h) - P_n(D_1, ..., D_{n-1})`.
pub fn build_d_family(n: usize, pn: &GradedPoly) -> Result<JetPoly> {
    check_in_vn(n, pn)?;
    Ok(build_dn(n + 1).sub(&graded_on_dn(pn)))
}

/// Coefficients of `h^(n)`, `h * h^(n-1)` and `h^(n+1)` in `D_n`.
pub fn head_tail_coefficients(n: usize) -> (Rational, Rational, Rational) {
    let d = build_dn(n);
    (
        d.coeff(&JetMonomial::var(n)),
        d.coeff(&JetMonomial::from_pairs(&[(0, 1), (n - 1, 1)])),
        d.coeff(&JetMonomial::from_pairs(&[(0, n as u32 + 1)])),
    )
}

/// `d = sum_k x_{k+1} d/dx_k`, mapping `V_n` into `V_{n+1}`.
pub fn apply_d_operator(pn: &GradedPoly) -> GradedPoly {
    let Some(top) = pn.max_var() else {
        return GradedPoly::zero();
    };
    let fields: Vec<(usize, GradedPoly)> =
        (2..=top).map(|k| (k, GradedPoly::var(k + 1))).collect();
    pn.derivation(&fields)
        .expect("d raises every weight by two")
}

/// `(1/b) det S_n(h)` with `b` kept symbolic.
///
/// `S_n` is lower Hessenberg: `S[i][j] = b h^(i-j)/(i-j)!` for `i >= j`,
/// `S[i][i+1] = -i`. Leading principal minors obey
/// `D_k = sum_j (-1)^(k-j) S[k][j] (prod_{m=j}^{k-1} S[m][m+1]) D_{j-1}`.
pub fn det_sn_symbolic(n: usize) -> JetPoly<UniPoly> {
    let size = n + 2;
    let entry = |i: usize, j: usize| -> JetPoly<UniPoly> {
        let q = i - j;
        JetPoly::term(
            UniPoly::monomial(factorial(q as u32).recip(), 1),
            JetMonomial::var(q),
        )
    };
    let mut minors: Vec<JetPoly<UniPoly>> = vec![JetPoly::constant(UniPoly::one())];
    for k in 1..=size {
        let mut dk = JetPoly::zero();
        for j in 1..=k {
            // product of superdiagonal entries S[m][m+1] = -m for m = j..k-1
            let chain: i64 = (j..k).map(|m| -(m as i64)).product();
            let sign = if (k - j) % 2 == 0 { 1 } else { -1 };
            let t = entry(k, j).mul(&minors[j - 1]).scale(&int(sign * chain));
            dk = dk.add(&t);
        }
        minors.push(dk);
    }
    minors[size].map_coeffs(|c| c.div_by_var().expect("first column carries b"))
}

/// `(1/b) det S_n(h)` at a concrete `b`.
pub fn det_sn(n: usize, b: &Rational) -> JetPoly {
    det_sn_symbolic(n).at(b)
}

/// Outcome of matching `(1/b) det S_n` against the family at `b = n+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetMatch {
    pub n: usize,
    /// Value forced by the `h * h^(n)` coefficient.
    pub b: Rational,
    /// Recovered `P_n`, or `None` when the system is inconsistent.
    pub pn: Option<GradedPoly>,
    /// `D_{P_n,n+1} - (1/b) det S_n` for the best particular solution; zero on a match.
    pub residual: JetPoly,
}

impl DetMatch {
    pub fn is_match(&self) -> bool {
        self.pn.is_some()
    }
}

/// The value of `b` for which the `h * h^(n)` coefficients of `(1/b) det S_n`
/// and `D_{P_n,n+1}` can agree.
pub fn forced_b(n: usize) -> Result<Rational> {
    let probe = JetMonomial::from_pairs(&[(0, 1), (n, 1)]);
    let det_coeff = det_sn_symbolic(n).coeff(&probe);
    for m in vn_basis(n) {
        let image = graded_on_dn(&GradedPoly::term(int(1), m));
        if !image.coeff(&probe).is_zero() {
            return Err(Error::InvalidArgument(
                "closing polynomial touches the h*h^(n) coefficient".into(),
            ));
        }
    }
    let target = build_dn(n + 1).coeff(&probe);
    match det_coeff.degree() {
        Some(1) => Ok((target - det_coeff.coeff(0)) / det_coeff.coeff(1)),
        _ => Err(Error::InvalidArgument(format!(
            "h*h^(n) coefficient of det S_{n} is not linear in b: {}",
            det_coeff.to_string_in("b")
        ))),
    }
}

/// Solves `D_{n+1} - P_n(D) = (1/b) det S_n` for `P_n in V_n` at the forced `b`.
pub fn match_det_sn_to_family(n: usize) -> Result<DetMatch> {
    let b = forced_b(n)?;
    let det = det_sn(n, &b);
    let target = build_dn(n + 1).sub(&det);
    let basis = vn_basis(n);
    let columns: Vec<JetPoly> = basis
        .iter()
        .map(|m| graded_on_dn(&GradedPoly::term(int(1), m.clone())))
        .collect();

    let mut monomials: Vec<JetMonomial> = target.terms().map(|(m, _)| m.clone()).collect();
    for col in &columns {
        monomials.extend(col.terms().map(|(m, _)| m.clone()));
    }
    monomials.sort();
    monomials.dedup();

    let rows: Vec<Vec<Rational>> = monomials
        .iter()
        .map(|m| columns.iter().map(|c| c.coeff(m)).collect())
        .collect();
    let rhs: Vec<Rational> = monomials.iter().map(|m| target.coeff(m)).collect();
    let (sol, consistent) = solve_linear(&rows, &rhs, basis.len());

    let pn = GradedPoly::from_terms(basis.into_iter().zip(sol))?;
    let residual = build_d_family(n, &pn)?.sub(&det);
    Ok(DetMatch {
        n,
        b,
        pn: (consistent && residual.is_zero()).then_some(pn),
        residual,
    })
}

/// An equation rewritten in `y = lambda h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescaled {
    /// Direct substitution `h^(q) = y^(q) / lambda`.
    pub raw: JetPoly,
    /// `raw` normalized so the top derivative has coefficient one.
    pub monic: JetPoly,
}

pub fn rescale_dependent(p: &JetPoly, lambda: &Rational) -> Result<Rescaled> {
    let raw = p.substitute_scaled(lambda)?;
    let lead = raw
        .order()
        .map(|q| raw.coeff(&JetMonomial::var(q)))
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::InvalidArgument("equation has no linear top-order term".into()))?;
    let monic = raw.scale(&lead.recip());
    Ok(Rescaled { raw, monic })
}

/// Solves `(24 - c4)/216 = -4/(k^2 - 36)` for `k^2`.
pub fn chazy12_parameter(c4: &Rational) -> Result<Rational> {
    let gap = int(24) - c4;
    if gap.is_zero() {
        return Err(Error::NotChazy12);
    }
    Ok(int(36) - int(864) / gap)
}
