//! Series solutions: the Φ recursion, the a(J) coefficient table, the
//! Ψ series with a free `x_1`, the sigma-function series and Hermite
//! polynomials.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{
    check_in_vn, factorial, fmt_rational_pq, int, monomials_of_weight, reduced_flows, Rational,
    Scalar, UniPoly, GradedMonomial, GradedPoly,
};
use crate::error::{Error, Result};

/// `c = -2(1 + 2 delta)`, the normalization used by the reduced systems.
pub fn default_c(delta: u8) -> Rational {
    int(-2 * (1 + 2 * delta as i64))
}

/// `c / (2(1 + 2 delta))`: the multiplier of `x_2` in `dh/dt = -h^2 - kappa x_2`.
pub fn kappa(c: &Rational, delta: u8) -> Rational {
    c / int(2 * (1 + 2 * delta as i64))
}

/// `Φ(z; x) = z^δ + Σ_{k=2}^{K} Φ_k(x) z^{2k+δ}/(2k+δ)!`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSeries {
    pub n: usize,
    pub delta: u8,
    pub c: Rational,
    pub k_max: usize,
    /// `coeffs[i]` is `Φ_{i+2}`.
    pub coeffs: Vec<GradedPoly>,
}

impl PhiSeries {
    /// `Φ_k`, zero for `k < 2` and beyond the truncation.
    pub fn phi(&self, k: usize) -> GradedPoly {
        if k < 2 {
            return GradedPoly::zero();
        }
        self.coeffs.get(k - 2).cloned().unwrap_or_default()
    }

    pub fn phi_mut(&mut self, k: usize) -> &mut GradedPoly {
        &mut self.coeffs[k - 2]
    }

    /// Values of `Φ_2..Φ_K` at a point.
    pub fn eval_coeffs<T: Scalar>(&self, x: &dyn Fn(usize) -> T) -> Vec<T> {
        self.coeffs.iter().map(|p| p.eval(x)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "delta": self.delta,
            "c": fmt_rational_pq(&self.c),
            "n": self.n,
            "K": self.k_max,
            "coeffs": self.coeffs.iter().enumerate()
                .map(|(i, p)| json!({"k": i + 2, "poly": p.to_string()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Φ for the reduced system `p_{k+1} = x_{k+1}`, `p_{n+2} = P_n`.
pub fn build_phi(n: usize, pn: &GradedPoly, c: &Rational, delta: u8, k_max: usize) -> Result<PhiSeries> {
    check_in_vn(n, pn)?;
    if n == 0 {
        return Ok(PhiSeries {
            n,
            delta,
            c: c.clone(),
            k_max,
            coeffs: vec![GradedPoly::zero(); k_max.saturating_sub(1)],
        });
    }
    build_phi_general(n, &reduced_flows(n, pn), c, delta, k_max)
}

/// Φ for a general system `dx_k/dτ = p_{k+1}(x)`, given as `(k, p_{k+1})`.
///
/// `Φ_2 = c x_2`, and for `q >= 3`
/// `Φ_q = 2 Σ p_{k+1} ∂_k Φ_{q-1} + (2q+δ-3)(2q+δ-2)/(2(1+2δ)) Φ_2 Φ_{q-2}`
/// with `Φ_1 = 0`, which gives `Φ_3 = 2c p_3`.
pub fn build_phi_general(
    n: usize,
    flows: &[(usize, GradedPoly)],
    c: &Rational,
    delta: u8,
    k_max: usize,
) -> Result<PhiSeries> {
    if delta > 1 {
        return Err(Error::InvalidArgument(format!("delta must be 0 or 1, got {delta}")));
    }
    for (k, p) in flows {
        let expected = 2 * (*k as u32 + 1);
        if let Some(found) = p.weight() {
            if found != expected {
                return Err(Error::WeightMismatch { expected, found });
            }
        }
    }
    let d = delta as i64;
    let phi2 = GradedPoly::term(c.clone(), GradedMonomial::var(2));
    // index q holds Φ_q; Φ_0, Φ_1 are placeholders
    let mut phi = vec![GradedPoly::zero(), GradedPoly::zero(), phi2.clone()];
    for q in 3..=k_max {
        let q_i = q as i64;
        let lie = phi[q - 1].derivation(flows)?.scale(&int(2));
        let coef = int((2 * q_i + d - 3) * (2 * q_i + d - 2)) / int(2 * (1 + 2 * d));
        let quad = phi2.mul(&phi[q - 2]).scale(&coef);
        phi.push(lie.add(&quad)?);
    }
    let coeffs = if k_max >= 2 { phi.split_off(2) } else { Vec::new() };
    Ok(PhiSeries { n, delta, c: c.clone(), k_max, coeffs })
}

/// The coefficients `a(J)` of `Φ = z^δ + Σ a(J) x^J z^{‖J‖+δ}/(‖J‖+δ)!`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub n: usize,
    pub delta: u8,
    pub c: Rational,
    pub k_max: usize,
    pub entries: BTreeMap<GradedMonomial, Rational>,
}

impl CoeffTable {
    pub fn get(&self, j: &GradedMonomial) -> Rational {
        self.entries.get(j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn to_json(&self) -> Value {
        let top = self.n + 1;
        let mut rows: Vec<(&GradedMonomial, &Rational)> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.0.weight().cmp(&b.0.weight()).then_with(|| a.0.cmp(b.0)));
        let entries: Vec<Value> = rows
            .into_iter()
            .map(|(j, a)| json!({"J": j.exponents_from(2, top), "a": fmt_rational_pq(a)}))
            .collect();
        json!({
            "delta": self.delta,
            "c": fmt_rational_pq(&self.c),
            "n": self.n,
            "K": self.k_max,
            "entries": entries,
        })
    }
}

/// `m / s` when `s` divides `m`.
fn div_monomial(m: &GradedMonomial, s: &GradedMonomial) -> Option<GradedMonomial> {
    let mut out = m.clone();
    for (k, e) in s.iter() {
        for _ in 0..e {
            out = out.div_var(k)?;
        }
    }
    Some(out)
}

/// Solves `W a(J) = 0` in increasing `‖J‖`:
///
/// `a(J) = κ(N+δ-2)(N+δ-3) a(J-e_2) + 2 Σ_{k=2}^{n} (j_k+1) a(J+e_k-e_{k+1})
///        + 2 Σ_S (j_{n+1}+1) p(S) a(J+e_{n+1}-S)`
///
/// with `N = ‖J‖`, `κ = c/(2(1+2δ))`, `a(0) = 1`.
pub fn build_coeff_table(
    n: usize,
    pn: &GradedPoly,
    c: &Rational,
    delta: u8,
    k_max: usize,
) -> Result<CoeffTable> {
    check_in_vn(n, pn)?;
    let kap = kappa(c, delta);
    let d = delta as i64;
    let mut entries: BTreeMap<GradedMonomial, Rational> = BTreeMap::new();
    entries.insert(GradedMonomial::one(), int(1));
    if n >= 1 {
        for w in 1..=k_max as u32 {
            let weight = 2 * w;
            for j in monomials_of_weight(weight, 2, n + 1) {
                let lookup = |m: &GradedMonomial| entries.get(m).cloned().unwrap_or_else(Rational::zero);
                let nn = weight as i64;
                let mut a = Rational::zero();
                if let Some(prev) = j.div_var(2) {
                    a += &kap * int((nn + d - 2) * (nn + d - 3)) * lookup(&prev);
                }
                for k in 2..=n {
                    if let Some(m) = j.div_var(k + 1) {
                        let m = m.mul(&GradedMonomial::var(k));
                        a += int(2 * m.exponent(k) as i64) * lookup(&m);
                    }
                }
                let raised = j.mul(&GradedMonomial::var(n + 1));
                for (s, ps) in pn.terms() {
                    if let Some(m) = div_monomial(&raised, s) {
                        a += int(2 * m.exponent(n + 1) as i64) * ps * lookup(&m);
                    }
                }
                entries.insert(j, a);
            }
        }
    }
    Ok(CoeffTable { n, delta, c: c.clone(), k_max, entries })
}

/// Groups the table by weight: `Φ_k = Σ_{‖J‖=2k} a(J) x^J`.
pub fn phi_from_table(t: &CoeffTable) -> Result<PhiSeries> {
    let mut coeffs = vec![GradedPoly::zero(); t.k_max.saturating_sub(1)];
    for (j, a) in &t.entries {
        let k = (j.weight() / 2) as usize;
        if (2..=t.k_max).contains(&k) {
            coeffs[k - 2] = coeffs[k - 2].add(&GradedPoly::term(a.clone(), j.clone()))?;
        }
    }
    Ok(PhiSeries { n: t.n, delta: t.delta, c: t.c.clone(), k_max: t.k_max, coeffs })
}

/// `Ψ(z; x) = z^δ + Σ_{k>=1} Ψ_k(x) z^{2k+δ}/(2k+δ)!` over `x_1..x_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiSeries {
    pub n: usize,
    pub delta: u8,
    pub k_max: usize,
    /// `coeffs[i]` is `Ψ_{i+1}`.
    pub coeffs: Vec<GradedPoly>,
}

impl PsiSeries {
    pub fn psi(&self, k: usize) -> GradedPoly {
        if k == 0 {
            return GradedPoly::zero();
        }
        self.coeffs.get(k - 1).cloned().unwrap_or_default()
    }

    /// `dr/dt = Ψ_1(x)/2`.
    pub fn r_rate(&self) -> GradedPoly {
        self.psi(1).scale(&Rational::new(1.into(), 2.into()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "delta": self.delta,
            "n": self.n,
            "K": self.k_max,
            "coeffs": self.coeffs.iter().enumerate()
                .map(|(i, p)| json!({"k": i + 1, "poly": p.to_string()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// `Ψ_{k+1} = 2 Σ_{j=1}^{n+1} p_{j+1} ∂_j Ψ_k + Ψ_1 Ψ_k`, flows given as `(j, p_{j+1})`.
pub fn build_psi(
    n: usize,
    flows: &[(usize, GradedPoly)],
    psi1: &GradedPoly,
    delta: u8,
    k_max: usize,
) -> Result<PsiSeries> {
    for (j, p) in flows {
        if *j == 0 || *j > n + 1 {
            return Err(Error::InvalidArgument(format!("flow index {j} outside 1..={}", n + 1)));
        }
        let expected = 2 * (*j as u32 + 1);
        if let Some(found) = p.weight() {
            if found != expected {
                return Err(Error::WeightMismatch { expected, found });
            }
        }
    }
    if let Some(found) = psi1.weight() {
        if found != 2 {
            return Err(Error::WeightMismatch { expected: 2, found });
        }
    }
    let mut coeffs = Vec::with_capacity(k_max);
    if k_max >= 1 {
        coeffs.push(psi1.clone());
    }
    for _ in 2..=k_max {
        let prev = coeffs.last().expect("seeded with Ψ_1");
        let next = prev
            .derivation(flows)?
            .scale(&int(2))
            .add(&psi1.mul(prev))?;
        coeffs.push(next);
    }
    Ok(PsiSeries { n, delta, k_max, coeffs })
}

/// The three-pole example: `p_2 = x_2`, `p_3 = x_3`,
/// `p_4 = -3(4x_1x_3 + 3x_2^2 + 18x_2x_1^2 + 9x_1^4)`.
pub fn three_pole_flows() -> Vec<(usize, GradedPoly)> {
    let m = |pairs: &[(usize, u32)]| GradedMonomial::from_pairs(pairs);
    let p4 = GradedPoly::from_terms([
        (m(&[(1, 1), (3, 1)]), int(-12)),
        (m(&[(2, 2)]), int(-9)),
        (m(&[(1, 2), (2, 1)]), int(-54)),
        (m(&[(1, 4)]), int(-27)),
    ])
    .expect("all terms have weight 8");
    vec![(1, GradedPoly::var(2)), (2, GradedPoly::var(3)), (3, p4)]
}

/// `Ψ_1 = -x_1/2` for the three-pole example.
pub fn three_pole_psi1() -> GradedPoly {
    GradedPoly::term(Rational::new((-1).into(), 2.into()), GradedMonomial::var(1))
}

/// Monomials spanning the closing polynomials `K_n(x_1, ..., x_{n+1})` of degree `-4(n+2)`.
pub fn kn_basis(n: usize) -> Vec<GradedMonomial> {
    monomials_of_weight(2 * (n as u32 + 2), 1, n + 1)
}

/// `σ(z) = Σ_{m>=0} S_m(g_2, g_3) z^{2m+1}/(2m+1)!`, `g_2` in slot 2, `g_3` in slot 3.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSeries {
    pub k_max: usize,
    /// `coeffs[m]` is `S_m`.
    pub coeffs: Vec<GradedPoly>,
}

impl SigmaSeries {
    pub fn to_json(&self) -> Value {
        json!({
            "K": self.k_max,
            "coeffs": self.coeffs.iter().enumerate()
                .map(|(m, p)| json!({"k": m, "order": 2 * m + 1, "poly": sigma_text(p)}))
                .collect::<Vec<_>>(),
        })
    }
}

pub fn sigma_text(p: &GradedPoly) -> String {
    p.to_string_with(&|k| format!("g{k}"))
}

/// `l_2 = 6 g_3 ∂/∂g_2 + (1/3) g_2^2 ∂/∂g_3`.
pub fn sigma_l2() -> Vec<(usize, GradedPoly)> {
    vec![
        (2, GradedPoly::term(int(6), GradedMonomial::var(3))),
        (3, GradedPoly::term(Rational::new(1.into(), 3.into()), GradedMonomial::from_pairs(&[(2, 2)]))),
    ]
}

/// Solves `Q_2 σ = 0` order by order. The coefficient of `z^{2m-1}/(2m-1)!`
/// in `Q_2 σ` is `S_m/2 + (g_2/24)(2m-1)(2m-2) S_{m-2} - l_2 S_{m-1}`; its
/// `S_m` coefficient is the nonzero constant `1/2`, so each order fixes the next.
pub fn sigma_series(k_max: usize) -> Result<SigmaSeries> {
    let l2 = sigma_l2();
    let g2_12 = GradedPoly::term(Rational::new(1.into(), 12.into()), GradedMonomial::var(2));
    let mut coeffs = vec![GradedPoly::constant(int(1))];
    for m in 1..=k_max {
        let mi = m as i64;
        let mut s = coeffs[m - 1].derivation(&l2)?.scale(&int(2));
        if m >= 2 {
            let t = g2_12.mul(&coeffs[m - 2]).scale(&int((2 * mi - 1) * (2 * mi - 2)));
            s = s.sub(&t)?;
        }
        coeffs.push(s);
    }
    Ok(SigmaSeries { k_max, coeffs })
}

/// `Q_0 σ = 0` in series form: every `S_m` is homogeneous of weight `2m`.
pub fn sigma_q0_holds(s: &SigmaSeries) -> bool {
    s.coeffs
        .iter()
        .enumerate()
        .all(|(m, p)| p.weight().map_or(true, |w| w == 2 * m as u32))
}

/// Residual coefficients of `Q_2 σ` at `z^{2m-1}/(2m-1)!` for `m = 1..=K`.
pub fn sigma_q2_residuals(s: &SigmaSeries) -> Result<Vec<GradedPoly>> {
    let l2 = sigma_l2();
    let g2 = GradedPoly::var(2);
    let half = Rational::new(1.into(), 2.into());
    let mut out = Vec::new();
    for m in 1..s.coeffs.len() {
        let mi = m as i64;
        let mut r = s.coeffs[m].scale(&half).sub(&s.coeffs[m - 1].derivation(&l2)?)?;
        if m >= 2 {
            let t = g2
                .mul(&s.coeffs[m - 2])
                .scale(&(int((2 * mi - 1) * (2 * mi - 2)) / int(24)));
            r = r.add(&t)?;
        }
        out.push(r);
    }
    Ok(out)
}

/// Substitutes `x_2 = g_2/12`, `x_3 = g_3/2` into each Φ_k.
pub fn phi_to_sigma_coords(series: &PhiSeries) -> Result<Vec<GradedPoly>> {
    let images = |k: usize| match k {
        2 => Some(GradedPoly::term(Rational::new(1.into(), 12.into()), GradedMonomial::var(2))),
        3 => Some(GradedPoly::term(Rational::new(1.into(), 2.into()), GradedMonomial::var(3))),
        _ => None,
    };
    series.coeffs.iter().map(|p| p.substitute(&images)).collect()
}

/// Probabilists' Hermite polynomial via `He_{k+1} = x He_k - He_k'`.
pub fn hermite(k: usize) -> UniPoly {
    let mut he = UniPoly::one();
    for _ in 0..k {
        he = UniPoly::var() * he.clone() - he.derivative();
    }
    he
}

/// Per-order outcome of the n = 1 eigenfunction check.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaReport {
    pub delta: u8,
    /// `λ = κ x_2 / (4(3+2δ))`.
    pub lambda: GradedPoly,
    /// `(k, ok)` keyed by the largest Φ index involved.
    pub orders: Vec<(usize, bool)>,
    pub first_failure: Option<usize>,
}

/// Checks, for an `n = 1` series, that `Φ_zz = κ x_2 z^2 Φ` and that `γ(v)` with `Φ = z^δ γ(z^4)` satisfies
/// `γ' + (4v/(3+2δ)) γ'' = λ γ`. The default `c` gives `κ = -1`.
pub fn gamma_eigen_check(series: &PhiSeries) -> Result<GammaReport> {
    let d = series.delta as i64;
    let kap = kappa(&series.c, series.delta);
    let x2 = GradedPoly::var(2);
    let lambda = x2.scale(&(&kap / int(4 * (3 + 2 * d))));
    let k_max = series.k_max;
    let mut checks: BTreeMap<usize, bool> = BTreeMap::new();

    // odd-index coefficients must vanish
    for k in (3..=k_max).step_by(2) {
        checks.insert(k, series.phi(k).is_zero());
    }

    // Φ_zz = κ x_2 z^2 Φ, compared at z^{4q+δ-2}/(4q+δ-2)!
    for q in 1..=k_max / 2 {
        let qi = q as i64;
        let prev = if q == 1 { GradedPoly::constant(int(1)) } else { series.phi(2 * q - 2) };
        let rhs = x2.mul(&prev).scale(&(&kap * int((4 * qi + d - 3) * (4 * qi + d - 2))));
        let ok = series.phi(2 * q).sub(&rhs)?.is_zero();
        let e = checks.entry(2 * q).or_insert(true);
        *e &= ok;
    }

    // γ coefficients g_q = Φ_{2q}/(4q+δ)!, g_0 = 1/δ!
    let g = |q: usize| -> GradedPoly {
        let base = if q == 0 { GradedPoly::constant(int(1)) } else { series.phi(2 * q) };
        base.scale(&factorial((4 * q as u32) + series.delta as u32).recip())
    };
    for q in 0..k_max / 2 {
        let qi = q as i64;
        let lhs_factor = int(qi + 1) * (int(1) + int(4 * qi) / int(3 + 2 * d));
        let lhs = g(q + 1).scale(&lhs_factor);
        let rhs = lambda.mul(&g(q));
        let ok = lhs.sub(&rhs)?.is_zero();
        let e = checks.entry(2 * q + 2).or_insert(true);
        *e &= ok;
    }

    let orders: Vec<(usize, bool)> = checks.into_iter().collect();
    let first_failure = orders.iter().find(|(_, ok)| !ok).map(|(k, _)| *k);
    Ok(GammaReport { delta: series.delta, lambda, orders, first_failure })
}

/// True when every coefficient is nonnegative.
pub fn table_nonnegative(t: &CoeffTable) -> bool {
    t.entries.values().all(|a| !a.is_negative())
}

/// True when every coefficient is an integer.
pub fn table_integral(t: &CoeffTable) -> bool {
    t.entries.values().all(|a| a.is_integer())
}

/// `Σ v_k z^{2k+δ}/(2k+δ)!` over `(k, v_k)` pairs, with its first two z-derivatives.
pub fn hurwitz_eval(values: &[(usize, f64)], delta: u8, z: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for &(k, v) in values {
        let p = 2 * k as i32 + delta as i32;
        let fact = |m: i32| (1..=m).fold(1.0, |acc, i| acc * i as f64);
        out[0] += v * z.powi(p) / fact(p);
        if p >= 1 {
            out[1] += v * z.powi(p - 1) / fact(p - 1);
        }
        if p >= 2 {
            out[2] += v * z.powi(p - 2) / fact(p - 2);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn mono(pairs: &[(usize, u32)]) -> GradedMonomial {
        GradedMonomial::from_pairs(pairs)
    }

    #[test]
    fn n1_matches_closed_form() {
        for delta in [0u8, 1] {
            let c = default_c(delta);
            let s = build_phi(1, &GradedPoly::zero(), &c, delta, 10).unwrap();
            assert_eq!(s.phi(2), GradedPoly::term(c.clone(), mono(&[(2, 1)])));
            let d = delta as i64;
            for q in 2..=5i64 {
                let expected = GradedPoly::var(2)
                    .mul(&s.phi(2 * q as usize - 2))
                    .scale(&int(-(4 * q + d - 3) * (4 * q + d - 2)));
                assert_eq!(s.phi(2 * q as usize), expected);
                assert!(s.phi(2 * q as usize - 1).is_zero());
            }
        }
    }

    #[test]
    fn n2_base_terms() {
        let p2 = GradedPoly::term(int(24), mono(&[(2, 2)]));
        let s = build_phi(2, &p2, &int(-6), 1, 3).unwrap();
        assert_eq!(s.coeffs, vec![
            GradedPoly::term(int(-6), mono(&[(2, 1)])),
            GradedPoly::term(int(-12), mono(&[(3, 1)])),
        ]);
    }

    #[test]
    fn weights_follow_index() {
        let p3 = GradedPoly::term(int(5), mono(&[(2, 1), (3, 1)]));
        let s = build_phi(3, &p3, &int(3), 0, 9).unwrap();
        for k in 2..=9 {
            let w = s.phi(k).weight();
            assert!(w.is_none() || w == Some(2 * k as u32));
        }
    }

    #[test]
    fn rejects_foreign_pn() {
        let bad = GradedPoly::var(3);
        assert!(matches!(
            build_phi(2, &bad, &int(1), 0, 4),
            Err(Error::WeightMismatch { expected: 8, found: 6 })
        ));
    }

    #[test]
    fn table_n1_recursion() {
        let c = int(3);
        for delta in [0u8, 1] {
            let t = build_coeff_table(1, &GradedPoly::zero(), &c, delta, 12).unwrap();
            assert_eq!(t.get(&GradedMonomial::one()), int(1));
            let kap = kappa(&c, delta);
            let d = delta as i64;
            for j in 1..=6u32 {
                let a = t.get(&mono(&[(2, j)]));
                let prev = t.get(&mono(&[(2, j - 1)]));
                let ji = j as i64;
                assert_eq!(a, &kap * int((4 * ji + d - 3) * (4 * ji + d - 2)) * prev);
            }
        }
    }

    #[test]
    fn table_matches_recursion_n2() {
        let p2 = GradedPoly::term(int(-4), mono(&[(2, 2)]));
        for delta in [0u8, 1] {
            let t = build_coeff_table(2, &p2, &rat(7, 3), delta, 10).unwrap();
            let a = phi_from_table(&t).unwrap();
            let b = build_phi(2, &p2, &rat(7, 3), delta, 10).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn zero_c_gives_bare_power() {
        let t = build_coeff_table(1, &GradedPoly::zero(), &int(0), 0, 8).unwrap();
        assert!(phi_from_table(&t).unwrap().coeffs.iter().all(GradedPoly::is_zero));
    }

    #[test]
    fn nonnegative_and_integral_examples() {
        let p = GradedPoly::term(int(1), mono(&[(2, 2)]));
        let t = build_coeff_table(2, &p, &int(2), 0, 8).unwrap();
        assert!(table_nonnegative(&t));
        assert!(table_integral(&t));
    }

    #[test]
    fn psi_recursion_steps() {
        let flows = three_pole_flows();
        let psi1 = three_pole_psi1();
        let s = build_psi(2, &flows, &psi1, 0, 3).unwrap();
        // Ψ_2 = 2 x_2 ∂_1(-x_1/2) + x_1^2/4 = -x_2 + x_1^2/4
        let expected = GradedPoly::from_terms([
            (mono(&[(2, 1)]), int(-1)),
            (mono(&[(1, 2)]), rat(1, 4)),
        ])
        .unwrap();
        assert_eq!(s.psi(2), expected);
        assert_eq!(s.psi(3).weight(), Some(6));
        let zero = build_psi(2, &flows, &GradedPoly::zero(), 1, 5).unwrap();
        assert!(zero.coeffs.iter().all(GradedPoly::is_zero));
    }

    #[test]
    fn kn_dimension() {
        for n in 0..=8 {
            assert_eq!(kn_basis(n).len() as u128, crate::algebra::partition_count(n + 2) - 1);
        }
    }

    #[test]
    fn sigma_low_terms() {
        let s = sigma_series(4).unwrap();
        assert_eq!(s.coeffs[0], GradedPoly::constant(int(1)));
        assert!(s.coeffs[1].is_zero());
        assert_eq!(sigma_text(&s.coeffs[2]), "-1/2*g2");
        assert_eq!(sigma_text(&s.coeffs[3]), "-6*g3");
        assert!(sigma_q0_holds(&s));
        assert!(sigma_q2_residuals(&s).unwrap().iter().all(GradedPoly::is_zero));
    }

    #[test]
    fn sigma_matches_phi() {
        let p2 = GradedPoly::term(int(24), mono(&[(2, 2)]));
        let phi = build_phi(2, &p2, &int(-6), 1, 6).unwrap();
        let s = sigma_series(6).unwrap();
        assert_eq!(phi_to_sigma_coords(&phi).unwrap(), s.coeffs[2..].to_vec());
    }

    #[test]
    fn hermite_low() {
        assert_eq!(hermite(0), UniPoly::one());
        assert_eq!(hermite(2).to_string_in("x"), "x^2 - 1");
        assert_eq!(hermite(3).to_string_in("x"), "x^3 - 3*x");
    }

    #[test]
    fn gamma_passes_and_detects_fault() {
        for delta in [0u8, 1] {
            let s = build_phi(1, &GradedPoly::zero(), &default_c(delta), delta, 16).unwrap();
            let r = gamma_eigen_check(&s).unwrap();
            assert_eq!(r.first_failure, None);
            assert_eq!(r.lambda, GradedPoly::var(2).scale(&rat(-1, 4 * (3 + 2 * delta as i64))));
            let mut bad = s.clone();
            *bad.phi_mut(4) = bad.phi(4).add(&GradedPoly::term(int(1), mono(&[(2, 2)]))).unwrap();
            assert_eq!(gamma_eigen_check(&bad).unwrap().first_failure, Some(4));
        }
    }

    #[test]
    fn json_shapes() {
        let s = build_phi(1, &GradedPoly::zero(), &int(-2), 0, 4).unwrap();
        let v = s.to_json();
        assert_eq!(v["coeffs"][0]["poly"], "-2*x2");
        assert_eq!(v["K"], 4);
        let t = build_coeff_table(1, &GradedPoly::zero(), &int(-2), 0, 4).unwrap();
        assert_eq!(t.to_json()["entries"][1]["J"], json!([1]));
        assert_eq!(t.to_json()["entries"][1]["a"], "-2/1");
    }
}
