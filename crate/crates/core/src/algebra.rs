//! Exact scalars, sparse graded polynomials and partition counting.
//!
//! Variables keep their natural index: `x_k` lives in slot `k` of a
//! [`GradedMonomial`], with weight `2k` (grading degree `-4k`). Slot 1 is
//! used by the extended ansatz series (and, in the heat-residual ring, for
//! `h`, which carries the same grading as `x_1`).

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    BigRational::from_integer(acc)
}

/// Parses `p`, `-p` or `p/q`. Decimal points are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    s.parse::<BigRational>()
        .ok()
        .filter(|r| !r.denom().is_zero())
        .ok_or_else(|| Error::Parse(s.to_string()))
}

/// Integer form when the denominator is one, `p/q` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Always `p/q`, including `0/1`.
pub fn fmt_rational_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Scalars the evaluators run on: exact rationals or binary floats.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_rat(r: &Rational) -> Self;
    fn as_f64(&self) -> f64;
    /// Text for reports: shortest round-trip decimal, or `p/q`.
    fn to_text(&self) -> String;

    fn from_i64(n: i64) -> Self {
        Self::from_rat(&int(n))
    }
    fn pow_u(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_rat(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn to_text(&self) -> String {
        format!("{self}")
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn pow_u(&self, e: u32) -> Self {
        f64::powi(*self, e as i32)
    }
}

impl Scalar for Rational {
    fn from_rat(r: &Rational) -> Self {
        r.clone()
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_text(&self) -> String {
        fmt_rational_pq(self)
    }
    fn from_i64(n: i64) -> Self {
        int(n)
    }
}

/// Coefficient rings for jet polynomials: plain rationals, or polynomials in
/// a free parameter (used for the symbolic `b` of the Hessenberg determinant).
pub trait Coefficient:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
{
    fn from_rational(r: Rational) -> Self;
    fn scale(&self, r: &Rational) -> Self;
}

impl Coefficient for Rational {
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
}

/// Dense univariate polynomial over the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c * v^e`.
    pub fn monomial(c: Rational, e: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); e + 1];
        coeffs[e] = c;
        Self::new(coeffs)
    }

    pub fn var() -> Self {
        Self::monomial(int(1), 1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, e: usize) -> Rational {
        self.coeffs.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(e, c)| c * int(e as i64))
                .collect(),
        )
    }

    pub fn eval<T: Scalar>(&self, v: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * v.clone() + T::from_rat(c))
    }

    /// Exact division by the variable; `None` if the constant term is nonzero.
    pub fn div_by_var(&self) -> Option<Self> {
        if !self.coeff(0).is_zero() {
            return None;
        }
        Some(Self::new(self.coeffs.iter().skip(1).cloned().collect()))
    }

    pub fn to_string_in(&self, var: &str) -> String {
        let mut out = String::new();
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let body = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            push_term(&mut out, c, &body);
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("x"))
    }
}

impl Add for UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|e| self.coeff(e) + rhs.coeff(e)).collect())
    }
}

impl Sub for UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: UniPoly) -> UniPoly {
        self + (-rhs)
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Mul for UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: UniPoly) -> UniPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return UniPoly::default();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

impl Zero for UniPoly {
    fn zero() -> Self {
        UniPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for UniPoly {
    fn one() -> Self {
        UniPoly::constant(int(1))
    }
}

impl Coefficient for UniPoly {
    fn from_rational(r: Rational) -> Self {
        UniPoly::constant(r)
    }
    fn scale(&self, r: &Rational) -> Self {
        UniPoly::new(self.coeffs.iter().map(|c| c * r).collect())
    }
}

/// Appends `c * body` to a sum being printed, with ` + ` / ` - ` joiners.
pub(crate) fn push_term(out: &mut String, c: &Rational, body: &str) {
    let negative = c.is_negative();
    let mag = c.abs();
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    if body.is_empty() {
        out.push_str(&fmt_rational(&mag));
    } else if mag.is_one() {
        out.push_str(body);
    } else {
        out.push_str(&fmt_rational(&mag));
        out.push('*');
        out.push_str(body);
    }
}

/// Exponent vector of a monomial in graded variables, indexed by variable
/// number. Trailing zeros are trimmed so equal monomials compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GradedMonomial {
    exps: Vec<u32>,
}

impl GradedMonomial {
    pub fn one() -> Self {
        GradedMonomial::default()
    }

    pub fn var(k: usize) -> Self {
        Self::from_pairs(&[(k, 1)])
    }

    pub fn from_pairs(pairs: &[(usize, u32)]) -> Self {
        let mut exps = Vec::new();
        for &(k, e) in pairs {
            if exps.len() <= k {
                exps.resize(k + 1, 0);
            }
            exps[k] += e;
        }
        Self::trimmed(exps)
    }

    /// Builds from `[j_first, j_first+1, ...]`.
    pub fn from_slice(first: usize, exps: &[u32]) -> Self {
        let mut v = vec![0; first];
        v.extend_from_slice(exps);
        Self::trimmed(v)
    }

    fn trimmed(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        GradedMonomial { exps }
    }

    pub fn exponent(&self, k: usize) -> u32 {
        self.exps.get(k).copied().unwrap_or(0)
    }

    /// Highest variable index present, `None` for the unit monomial.
    pub fn max_var(&self) -> Option<usize> {
        self.exps.len().checked_sub(1)
    }

    pub fn min_var(&self) -> Option<usize> {
        self.exps.iter().position(|&e| e > 0)
    }

    /// `||J|| = sum 2k j_k`.
    pub fn weight(&self) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .map(|(k, &e)| 2 * k as u32 * e)
            .sum()
    }

    /// Grading degree `sum (-4k) j_k = -2 ||J||`.
    pub fn degree(&self) -> i64 {
        -2 * self.weight() as i64
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.exps.len().max(other.exps.len());
        Self::trimmed((0..n).map(|k| self.exponent(k) + other.exponent(k)).collect())
    }

    /// `self / x_k`, or `None` when `x_k` does not divide.
    pub fn div_var(&self, k: usize) -> Option<Self> {
        if self.exponent(k) == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[k] -= 1;
        Some(Self::trimmed(exps))
    }

    /// Shifts exponent of `x_k` by `delta`; `None` if it would go negative.
    pub fn shifted(&self, k: usize, delta: i64) -> Option<Self> {
        let e = self.exponent(k) as i64 + delta;
        if e < 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        if exps.len() <= k {
            exps.resize(k + 1, 0);
        }
        exps[k] = e as u32;
        Some(Self::trimmed(exps))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| (k, e))
    }

    pub fn exponents_from(&self, first: usize, last: usize) -> Vec<u32> {
        (first..=last).map(|k| self.exponent(k)).collect()
    }

    pub fn eval<T: Scalar>(&self, value: &dyn Fn(usize) -> T) -> T {
        self.iter()
            .fold(T::one(), |acc, (k, e)| acc * value(k).pow_u(e))
    }

    pub fn to_string_with(&self, name: &dyn Fn(usize) -> String) -> String {
        self.iter()
            .map(|(k, e)| {
                if e == 1 {
                    name(k)
                } else {
                    format!("{}^{e}", name(k))
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Colex order: the monomial whose highest differing variable carries the
/// larger exponent is larger. Among equal-weight monomials this lists
/// `x2^3, x3^2, x2*x4`.
impl Ord for GradedMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exps
            .len()
            .cmp(&other.exps.len())
            .then_with(|| self.exps.iter().rev().cmp(other.exps.iter().rev()))
    }
}

impl PartialOrd for GradedMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GradedMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("1");
        }
        f.write_str(&self.to_string_with(&|k| format!("x{k}")))
    }
}

/// Sparse homogeneous polynomial in graded variables with rational
/// coefficients. The zero polynomial has no weight and combines with any.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedPoly {
    terms: BTreeMap<GradedMonomial, Rational>,
    weight: Option<u32>,
}

impl GradedPoly {
    pub fn zero() -> Self {
        GradedPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, GradedMonomial::one())
    }

    pub fn var(k: usize) -> Self {
        Self::term(int(1), GradedMonomial::var(k))
    }

    pub fn term(c: Rational, m: GradedMonomial) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let weight = Some(m.weight());
        let mut terms = BTreeMap::new();
        terms.insert(m, c);
        GradedPoly { terms, weight }
    }

    /// Builds from terms, failing if they do not share one weight.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GradedMonomial, Rational)>,
    {
        let mut out = GradedPoly::zero();
        for (m, c) in terms {
            out.add_term(m, c)?;
        }
        Ok(out)
    }

    fn add_term(&mut self, m: GradedMonomial, c: Rational) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let w = m.weight();
        if let Some(expected) = self.weight {
            if expected != w {
                return Err(Error::WeightMismatch { expected, found: w });
            }
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
        self.weight = if self.terms.is_empty() { None } else { Some(w) };
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn weight(&self) -> Option<u32> {
        self.weight
    }

    pub fn degree(&self) -> Option<i64> {
        self.weight.map(|w| -2 * w as i64)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GradedMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &GradedMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.max_var()).max()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        GradedPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
            weight: self.weight,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<GradedMonomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *terms.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        let weight = terms.keys().next().map(|m| m.weight());
        GradedPoly { terms, weight }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(int(1)), |acc, _| acc.mul(self))
    }

    /// Formal partial derivative with respect to `x_k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(k);
            if let Some(d) = m.div_var(k) {
                terms.insert(d, c * int(e as i64));
            }
        }
        let weight = terms.keys().next().map(|m: &GradedMonomial| m.weight());
        GradedPoly { terms, weight }
    }

    /// `sum_k fields[k] * d/dx_k`, with `fields` given as `(k, p_k)` pairs.
    pub fn derivation(&self, fields: &[(usize, GradedPoly)]) -> Result<Self> {
        let mut out = GradedPoly::zero();
        for (k, p) in fields {
            out = out.add(&p.mul(&self.partial(*k)))?;
        }
        Ok(out)
    }

    /// Replaces each `x_k` with `images(k)` (or leaves it when `None`).
    pub fn substitute(&self, images: &dyn Fn(usize) -> Option<GradedPoly>) -> Result<Self> {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let mut t = GradedPoly::constant(c.clone());
            for (k, e) in m.iter() {
                let img = images(k).unwrap_or_else(|| GradedPoly::var(k));
                t = t.mul(&img.pow(e));
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Evaluates with `value(k)` standing for `x_k`.
    pub fn eval<T: Scalar>(&self, value: &dyn Fn(usize) -> T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (m, c)| {
            acc + T::from_rat(c) * m.eval(value)
        })
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn to_string_with(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        for (m, c) in &self.terms {
            push_term(&mut out, c, &m.to_string_with(name));
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&|k| format!("x{k}")))
    }
}

/// The reduced flow `p_{k+1} = x_{k+1}` for `k = 2..n`, `p_{n+2} = pn`,
/// returned as `(k, p_{k+1})` pairs ready for [`GradedPoly::derivation`].
pub fn reduced_flows(n: usize, pn: &GradedPoly) -> Vec<(usize, GradedPoly)> {
    if n == 0 {
        return Vec::new();
    }
    let mut fields: Vec<(usize, GradedPoly)> =
        (2..=n).map(|k| (k, GradedPoly::var(k + 1))).collect();
    fields.push((n + 1, pn.clone()));
    fields
}

/// Number of partitions of `m`, by the bounded-part table.
pub fn partition_count(m: usize) -> u128 {
    let mut table = vec![0u128; m + 1];
    table[0] = 1;
    for part in 1..=m {
        for total in part..=m {
            table[total] += table[total - part];
        }
    }
    table[m]
}

/// `dim V_n = p(n+2) - p(n+1) - 1`.
pub fn dim_vn(n: usize) -> usize {
    (partition_count(n + 2) - partition_count(n + 1) - 1) as usize
}

/// All monomials in `x_lo..=x_hi` with `||J|| = weight`, in monomial order.
pub fn monomials_of_weight(weight: u32, lo: usize, hi: usize) -> Vec<GradedMonomial> {
    fn rec(
        k: usize,
        lo: usize,
        remaining: u32,
        current: &mut Vec<(usize, u32)>,
        out: &mut Vec<GradedMonomial>,
    ) {
        if remaining == 0 {
            out.push(GradedMonomial::from_pairs(current));
            return;
        }
        if k < lo || k == 0 {
            return;
        }
        let w = 2 * k as u32;
        let mut e = 0;
        while e * w <= remaining {
            if e > 0 {
                current.push((k, e));
            }
            rec(k - 1, lo, remaining - e * w, current, out);
            if e > 0 {
                current.pop();
            }
            e += 1;
        }
    }
    let mut out = Vec::new();
    if lo <= hi {
        rec(hi, lo.max(1), weight, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

/// Monomials spanning `V_n`: weight `2(n+2)` in `x_2..x_{n+1}`.
pub fn vn_basis(n: usize) -> Vec<GradedMonomial> {
    if n == 0 {
        return Vec::new();
    }
    monomials_of_weight(2 * (n as u32 + 2), 2, n + 1)
}

/// Checks that `pn` lies in `V_n`.
pub fn check_in_vn(n: usize, pn: &GradedPoly) -> Result<()> {
    let expected = 2 * (n as u32 + 2);
    match pn.weight() {
        None => Ok(()),
        Some(w) if w != expected => Err(Error::WeightMismatch { expected, found: w }),
        Some(_) => match pn.max_var() {
            Some(k) if k > n + 1 || pn.terms().any(|(m, _)| m.min_var() < Some(2)) => Err(
                Error::InvalidArgument(format!("P_{n} uses variables outside x2..x{}", n + 1)),
            ),
            _ => Ok(()),
        },
    }
}

/// Dense exact Gaussian elimination for `A c = rhs`. Returns a particular
/// solution (free unknowns set to zero) and whether the system is consistent.
pub fn solve_linear(rows: &[Vec<Rational>], rhs: &[Rational], unknowns: usize) -> (Vec<Rational>, bool) {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..unknowns {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..=unknowns {
                    let delta = &f * &m[row][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let consistent = m[row..].iter().all(|r| r[unknowns].is_zero());
    let mut sol = vec![Rational::zero(); unknowns];
    for (i, &col) in pivots.iter().enumerate() {
        sol[col] = m[i][unknowns].clone();
    }
    (sol, consistent)
}
