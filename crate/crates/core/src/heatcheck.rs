//! Verification that `ψ(z,t) = exp(-h z^2/2 + r) S(z; x(t))` solves
//! `∂ψ/∂t = ½ ∂²ψ/∂z²`, exactly (order by order in `z`) and numerically.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{factorial, int, rational_to_f64, GradedPoly, Rational};
use crate::dynsys::{eval_rational_h, vector_field, RationalH, SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::phi::{hermite, PhiSeries, PsiSeries};

/// `z^δ + Σ v_k z^{2k+δ}/(2k+δ)!` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzSeries {
    pub delta: u8,
    /// `(k, coefficient of z^{2k+δ}/(2k+δ)!)`.
    pub terms: Vec<(usize, GradedPoly)>,
    /// Highest variable slot referenced.
    pub vars: usize,
    partials: Vec<Vec<(usize, GradedPoly)>>,
}

impl HurwitzSeries {
    pub fn new(delta: u8, terms: Vec<(usize, GradedPoly)>) -> Self {
        let vars = terms.iter().filter_map(|(_, p)| p.max_var()).max().unwrap_or(0);
        let partials = terms
            .iter()
            .map(|(_, p)| (1..=vars).map(|j| (j, p.partial(j))).filter(|(_, d)| !d.is_zero()).collect())
            .collect();
        HurwitzSeries { delta, terms, vars, partials }
    }

    pub fn from_phi(s: &PhiSeries) -> Self {
        Self::new(s.delta, s.coeffs.iter().enumerate().map(|(i, p)| (i + 2, p.clone())).collect())
    }

    pub fn from_psi(s: &PsiSeries) -> Self {
        Self::new(s.delta, s.coeffs.iter().enumerate().map(|(i, p)| (i + 1, p.clone())).collect())
    }

    /// `[S, S_z, S_zz]` and `∂S/∂x_j` at `x` (indexed by slot) and `z`.
    pub fn eval(&self, x: &[f64], z: f64) -> SeriesValue {
        let d = self.delta as i32;
        let value_of = |k: usize| x.get(k).copied().unwrap_or(0.0);
        let mut s = [0.0; 3];
        let mut dx = vec![0.0; self.vars + 1];
        let mut last_term = 0.0;
        let basis = |p: i32| -> [f64; 3] {
            let f = |m: i32| if m < 0 { 0.0 } else { z.powi(m) / fact_f64(m as u32) };
            [f(p), f(p - 1), f(p - 2)]
        };
        let b0 = basis(d);
        for i in 0..3 {
            s[i] += b0[i];
        }
        for ((k, p), parts) in self.terms.iter().zip(&self.partials) {
            let pw = 2 * *k as i32 + d;
            let b = basis(pw);
            let v = p.eval(&value_of);
            for i in 0..3 {
                s[i] += v * b[i];
            }
            for (j, q) in parts {
                dx[*j] += q.eval(&value_of) * b[0];
            }
            last_term = v * b[0];
        }
        SeriesValue { s, dx, last_term }
    }

    /// Largest `|z| <= cap` at which the last retained term is at most `2^-40` of the sum.
    pub fn validity_radius(&self, x: &[f64], cap: f64) -> f64 {
        let ok = |z: f64| {
            let v = self.eval(x, z);
            v.last_term.abs() <= 2f64.powi(-40) * v.s[0].abs()
        };
        if ok(cap) {
            return cap;
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesValue {
    /// `[S, S_z, S_zz]`.
    pub s: [f64; 3],
    /// `∂S/∂x_j`, indexed by slot.
    pub dx: Vec<f64>,
    pub last_term: f64,
}

fn fact_f64(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}

/// `(h, r, x)` at one time, with exact time derivatives when available.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzPoint {
    pub h: f64,
    pub r: f64,
    /// Indexed by slot; entry `k` is `x_k`.
    pub x: Vec<f64>,
    pub rates: Option<AnsatzRates>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzRates {
    pub h: f64,
    pub r: f64,
    pub x: Vec<f64>,
}

pub trait StateProvider {
    fn point(&self, t: f64) -> Result<AnsatzPoint>;
    fn t_range(&self) -> (f64, f64);
}

fn slot_vector(n: usize, x: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; n + 2];
    v[2..(n + 2)].copy_from_slice(&x[..n]);
    v
}

impl StateProvider for Trajectory<f64> {
    fn point(&self, t: f64) -> Result<AnsatzPoint> {
        let s = self.state_at(t)?;
        let v = vector_field(&self.spec, &s)?;
        Ok(AnsatzPoint {
            h: s.h,
            r: s.r,
            x: slot_vector(self.spec.n, &s.x),
            rates: Some(AnsatzRates { h: v.h, r: v.r, x: slot_vector(self.spec.n, &v.x) }),
        })
    }

    fn t_range(&self) -> (f64, f64) {
        Trajectory::t_range(self)
    }
}

/// `h = a/(at - b)`, `r = r_0 - (δ+½) ln(at - b)`, valid for `at - b > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormN0 {
    pub a: f64,
    pub b: f64,
    pub r0: f64,
    pub delta: u8,
}

impl StateProvider for ClosedFormN0 {
    fn point(&self, t: f64) -> Result<AnsatzPoint> {
        let w = self.a * t - self.b;
        if w <= 0.0 {
            return Err(Error::OutOfRange { t });
        }
        let h = self.a / w;
        let m = self.delta as f64 + 0.5;
        Ok(AnsatzPoint {
            h,
            r: self.r0 - m * w.ln(),
            x: vec![0.0; 2],
            rates: Some(AnsatzRates { h: -h * h, r: -m * h, x: vec![0.0; 2] }),
        })
    }

    fn t_range(&self) -> (f64, f64) {
        let start = if self.a > 0.0 { self.b / self.a } else { f64::NEG_INFINITY };
        (start, f64::INFINITY)
    }
}

/// State from a pole-sum `h` lifted through `x_{k+1} = D_k(h)`, with
/// `r = r_0 - (δ+½)(1/b) Σ ln(t - a_k)`; requires `t` beyond every pole.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalLift {
    pub rh: RationalH,
    pub n: usize,
    pub delta: u8,
    pub r0: f64,
}

impl StateProvider for RationalLift {
    fn point(&self, t: f64) -> Result<AnsatzPoint> {
        let (lo, _) = self.t_range();
        if t <= lo {
            return Err(Error::OutOfRange { t });
        }
        let jet: Vec<f64> = eval_rational_h(&self.rh, &t, self.n + 2)?;
        let polys = crate::dynsys::lift_polys(self.n + 1);
        let x_all: Vec<f64> = polys.iter().map(|p| p.eval(&jet)).collect::<Result<_>>()?;
        let m = self.delta as f64 + 0.5;
        let inv_b = rational_to_f64(&self.rh.b.recip());
        let logs: f64 = self.rh.poles.iter().map(|a| (t - rational_to_f64(a)).ln()).sum();
        let h = jet[0];
        let mut x = vec![0.0; self.n + 2];
        let mut dx = vec![0.0; self.n + 2];
        for k in 2..=self.n + 1 {
            x[k] = x_all[k - 2];
            // x_k' = x_{k+1} - 2k h x_k, with x_{k+1} = D_k(h)
            dx[k] = x_all[k - 1] - 2.0 * k as f64 * h * x[k];
        }
        let x2 = x_all[0];
        Ok(AnsatzPoint {
            h,
            r: self.r0 - m * inv_b * logs,
            x,
            rates: Some(AnsatzRates { h: -h * h + x2, r: -m * h, x: dx }),
        })
    }

    fn t_range(&self) -> (f64, f64) {
        let last = self.rh.poles.iter().map(rational_to_f64).fold(f64::NEG_INFINITY, f64::max);
        (last, f64::INFINITY)
    }
}

/// `x_1 = (1/3) Σ 1/(t - a_k)`, `x_2 = x_1'`, `x_3 = x_1''`, `r = -(1/12) Σ ln(t - a_k)`, `h = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreePole {
    pub poles: [Rational; 3],
}

impl ThreePole {
    pub fn rational_h(&self) -> RationalH {
        RationalH { b: int(3), poles: self.poles.to_vec() }
    }
}

impl StateProvider for ThreePole {
    fn point(&self, t: f64) -> Result<AnsatzPoint> {
        let (lo, _) = self.t_range();
        if t <= lo {
            return Err(Error::OutOfRange { t });
        }
        let jet: Vec<f64> = eval_rational_h(&self.rational_h(), &t, 3)?;
        let logs: f64 = self.poles.iter().map(|a| (t - rational_to_f64(a)).ln()).sum();
        Ok(AnsatzPoint {
            h: 0.0,
            r: -logs / 12.0,
            x: vec![0.0, jet[0], jet[1], jet[2]],
            rates: Some(AnsatzRates {
                h: 0.0,
                r: -jet[0] / 4.0,
                x: vec![0.0, jet[1], jet[2], jet[3]],
            }),
        })
    }

    fn t_range(&self) -> (f64, f64) {
        let last = self.poles.iter().map(rational_to_f64).fold(f64::NEG_INFINITY, f64::max);
        (last, f64::INFINITY)
    }
}

/// A series together with the state it is evaluated on.
pub struct AnsatzSolution<'a> {
    pub series: HurwitzSeries,
    pub provider: &'a dyn StateProvider,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    /// Size of the last retained series term times the Gaussian factor.
    pub tail: f64,
}

/// `ψ` from explicit `(h, r, x)`.
pub fn psi_from_state(series: &HurwitzSeries, h: f64, r: f64, x: &[f64], z: f64) -> PsiValue {
    let e = (-0.5 * h * z * z + r).exp();
    let v = series.eval(x, z);
    PsiValue { value: e * v.s[0], tail: (e * v.last_term).abs() }
}

pub fn psi_eval(sol: &AnsatzSolution<'_>, z: f64, t: f64) -> Result<PsiValue> {
    let p = sol.provider.point(t)?;
    Ok(psi_from_state(&sol.series, p.h, p.r, &p.x, z))
}

/// `[ψ_t (exact chain rule), ½ψ_zz]` at a point.
fn heat_sides(series: &HurwitzSeries, p: &AnsatzPoint, z: f64) -> Result<(f64, f64)> {
    let rates = p
        .rates
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("state provider has no exact rates".into()))?;
    let e = (-0.5 * p.h * z * z + p.r).exp();
    let v = series.eval(&p.x, z);
    let [s, sz, szz] = v.s;
    let mut chain = 0.0;
    for (j, d) in v.dx.iter().enumerate() {
        chain += rates.x.get(j).copied().unwrap_or(0.0) * d;
    }
    let psi_t = e * ((-0.5 * rates.h * z * z + rates.r) * s + chain);
    let psi_zz = e * ((p.h * p.h * z * z - p.h) * s - 2.0 * p.h * z * sz + szz);
    Ok((psi_t, 0.5 * psi_zz))
}

/// Outcome of a numeric residual sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericReport {
    pub case: String,
    pub z_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub fd_step: f64,
    /// `max |ψ_t^FD - ½ψ_zz| / scale`.
    pub max_residual: f64,
    /// `max |ψ_t^FD - ψ_t| / scale`: finite-difference error.
    pub fd_component: f64,
    /// `max |ψ_t - ½ψ_zz| / scale`: series truncation (and state) error.
    pub truncation_component: f64,
    /// `max |½ψ_zz|` over the grid.
    pub scale: f64,
    /// Smallest truncation-validity radius over the t-grid.
    pub validity_radius: f64,
}

impl NumericReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }

    pub fn to_json(&self, tol: f64) -> Value {
        json!({
            "case": self.case,
            "mode": "numeric",
            "grid": {"z": self.z_grid, "t": self.t_grid, "fd_step": self.fd_step},
            "first_failure": if self.passes(tol) { Value::Null } else { json!(self.max_residual) },
            "max_residual": self.max_residual,
            "error_budget": {
                "fd": self.fd_component,
                "truncation": self.truncation_component,
                "scale": self.scale,
                "validity_radius": self.validity_radius,
            },
        })
    }
}

/// Central differences in `t` against the exact `z`-derivatives of the series.
pub fn numeric_heat_residual(
    case: &str,
    sol: &AnsatzSolution<'_>,
    z_grid: &[f64],
    t_grid: &[f64],
    fd_step: f64,
) -> Result<NumericReport> {
    let (lo, hi) = sol.provider.t_range();
    let mut rows = Vec::new();
    let mut radius = f64::INFINITY;
    let z_cap = z_grid.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    for &t in t_grid {
        if t - fd_step < lo || t + fd_step > hi {
            return Err(Error::OutOfRange { t });
        }
        let p = sol.provider.point(t)?;
        let before = sol.provider.point(t - fd_step)?;
        let after = sol.provider.point(t + fd_step)?;
        radius = radius.min(sol.series.validity_radius(&p.x, z_cap.max(1e-12)));
        for &z in z_grid {
            let (psi_t, half_zz) = heat_sides(&sol.series, &p, z)?;
            let plus = psi_from_state(&sol.series, after.h, after.r, &after.x, z).value;
            let minus = psi_from_state(&sol.series, before.h, before.r, &before.x, z).value;
            let fd = (plus - minus) / (2.0 * fd_step);
            rows.push((fd, psi_t, half_zz));
        }
    }
    let scale = rows.iter().fold(0.0f64, |m, r| m.max(r.2.abs())).max(f64::MIN_POSITIVE);
    let mut out = NumericReport {
        case: case.to_string(),
        z_grid: z_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        fd_step,
        max_residual: 0.0,
        fd_component: 0.0,
        truncation_component: 0.0,
        scale,
        validity_radius: radius,
    };
    for (fd, psi_t, half_zz) in rows {
        out.max_residual = out.max_residual.max((fd - half_zz).abs() / scale);
        out.fd_component = out.fd_component.max((fd - psi_t).abs() / scale);
        out.truncation_component = out.truncation_component.max((psi_t - half_zz).abs() / scale);
    }
    Ok(out)
}

/// Evenly spaced grid of `count` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![a];
    }
    (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect()
}

/// `max |r(t) - r(0) + (δ+½) ∫_0^t h|` over the nodes of a uniform trajectory (composite Simpson).
pub fn r_consistency(traj: &Trajectory<f64>) -> f64 {
    let m = traj.spec.delta as f64 + 0.5;
    let s = &traj.states;
    let mut worst = 0.0f64;
    let mut i = 2;
    while i < s.len() {
        let dt = s[i].t - s[0].t;
        let nodes = &s[..=i];
        let w = (nodes[1].t - nodes[0].t) / 3.0;
        let mut integral = 0.0;
        for (j, st) in nodes.iter().enumerate() {
            let c = if j == 0 || j == i { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            integral += c * st.h;
        }
        integral *= w;
        if dt > 0.0 {
            worst = worst.max((s[i].r - s[0].r + m * integral).abs());
        }
        i += 2;
    }
    worst
}

/// Per-order outcome of the exact residual.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicReport {
    pub case: String,
    pub orders_checked: Vec<usize>,
    pub first_failure: Option<usize>,
    /// Largest absolute coefficient among residual polynomials.
    pub max_residual: Rational,
    /// Nonzero residual coefficients, keyed by `z`-order.
    pub residuals: BTreeMap<usize, GradedPoly>,
}

impl SymbolicReport {
    pub fn passes(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "case": self.case,
            "mode": "symbolic",
            "orders_checked": self.orders_checked,
            "first_failure": self.first_failure,
            "max_residual": crate::algebra::fmt_rational_pq(&self.max_residual),
            "error_budget": Value::Null,
            "residuals": self.residuals.iter()
                .map(|(m, p)| json!({"order": m, "poly": p.to_string_with(&slot_name)}))
                .collect::<Vec<_>>(),
        })
    }
}

fn slot_name(k: usize) -> String {
    if k == 1 {
        "h".into()
    } else {
        format!("x{k}")
    }
}

/// Coefficients `φ_j` of `z^j` (not divided by factorials) of `z^δ + Σ v_k z^{2k+δ}/(2k+δ)!`.
fn z_coefficients(delta: u8, terms: &[(usize, GradedPoly)]) -> BTreeMap<usize, GradedPoly> {
    let mut out = BTreeMap::new();
    out.insert(delta as usize, GradedPoly::constant(int(1)));
    for (k, p) in terms {
        let j = 2 * k + delta as usize;
        out.insert(j, p.scale(&factorial(j as u32).recip()));
    }
    out
}

fn report_from(case: &str, residual: BTreeMap<usize, GradedPoly>, orders: Vec<usize>) -> SymbolicReport {
    let mut residuals = BTreeMap::new();
    let mut max_residual = Rational::zero();
    let mut first_failure = None;
    for m in &orders {
        if let Some(p) = residual.get(m).filter(|p| !p.is_zero()) {
            first_failure.get_or_insert(*m);
            for (_, c) in p.terms() {
                if c.abs() > max_residual {
                    max_residual = c.abs();
                }
            }
            residuals.insert(*m, p.clone());
        }
    }
    SymbolicReport { case: case.to_string(), orders_checked: orders, first_failure, max_residual, residuals }
}

fn add_at(map: &mut BTreeMap<usize, GradedPoly>, m: usize, p: GradedPoly) -> Result<()> {
    let slot = map.entry(m).or_default();
    *slot = slot.add(&p)?;
    Ok(())
}

/// Exact `z`-coefficients of `e^{h z^2/2 - r}(ψ_t - ½ψ_zz)` for the ansatz with
/// series `Φ`, in the ring of polynomials in `h` (slot 1) and `x_2..x_{n+1}`,
/// with time derivatives replaced by the flow:
///
/// `R = (-½ḣz² + ṙ)Φ + Σ ẋ_k ∂_kΦ - ½Φ'' + h z Φ' + ½hΦ - ½h²z²Φ`,
/// `ṙ = -(δ+½)h`, `ḣ = -h² - κx_2`, `ẋ_k = p_{k+1} - 2k h x_k`.
///
/// Orders `m = δ, δ+2, ..., 2K+δ-2` are checked; a fault in `Φ_k` first shows at `2k+δ-2`.
pub fn symbolic_heat_residual(case: &str, spec: &SystemSpec, series: &PhiSeries) -> Result<SymbolicReport> {
    let delta = series.delta;
    let terms: Vec<(usize, GradedPoly)> =
        series.coeffs.iter().enumerate().map(|(i, p)| (i + 2, p.clone())).collect();
    let phi = z_coefficients(delta, &terms);
    let h = GradedPoly::var(1);
    let half = Rational::new(1.into(), 2.into());
    let r_dot = h.scale(&-(int(delta as i64) + &half));
    let h_dot = h.mul(&h).neg().sub(&GradedPoly::var(2).scale(&spec.kappa()))?;
    let mut x_dot = Vec::new();
    for (k, p) in &spec.flows {
        let drift = h.mul(&GradedPoly::var(*k)).scale(&int(-2 * *k as i64));
        x_dot.push((*k, p.add(&drift)?));
    }

    let mut res: BTreeMap<usize, GradedPoly> = BTreeMap::new();
    for (&j, c) in &phi {
        // (-½ḣ z² + ṙ + ½h - ½h² z²) φ_j z^j
        add_at(&mut res, j + 2, h_dot.mul(c).scale(&-half.clone()))?;
        add_at(&mut res, j, r_dot.mul(c).add(&h.mul(c).scale(&half))?)?;
        add_at(&mut res, j + 2, h.mul(&h).mul(c).scale(&-half.clone()))?;
        // Σ ẋ_k ∂_k φ_j z^j
        add_at(&mut res, j, c.derivation(&x_dot)?)?;
        // h z Φ': j φ_j z^j
        add_at(&mut res, j, h.mul(c).scale(&int(j as i64)))?;
        // -½Φ'': -½ j(j-1) φ_j z^{j-2}
        if j >= 2 {
            add_at(&mut res, j - 2, c.scale(&(-half.clone() * int((j * (j - 1)) as i64))))?;
        }
    }
    let top = 2 * series.k_max + delta as usize;
    let orders: Vec<usize> = (delta as usize..=top.saturating_sub(2)).step_by(2).collect();
    Ok(report_from(case, res, orders))
}

/// Exact residual of `ψ = e^r Ψ` with `ṙ = ½Ψ_1`, `ẋ_j = p_{j+1}`:
/// `R = ṙΨ + Σ ẋ_j ∂_jΨ - ½Ψ''`.
pub fn symbolic_psi_residual(case: &str, flows: &[(usize, GradedPoly)], series: &PsiSeries) -> Result<SymbolicReport> {
    let delta = series.delta;
    let terms: Vec<(usize, GradedPoly)> =
        series.coeffs.iter().enumerate().map(|(i, p)| (i + 1, p.clone())).collect();
    let psi = z_coefficients(delta, &terms);
    let half = Rational::new(1.into(), 2.into());
    let r_dot = series.psi(1).scale(&half);
    let mut res: BTreeMap<usize, GradedPoly> = BTreeMap::new();
    for (&j, c) in &psi {
        add_at(&mut res, j, r_dot.mul(c).add(&c.derivation(flows)?)?)?;
        if j >= 2 {
            add_at(&mut res, j - 2, c.scale(&(-half.clone() * int((j * (j - 1)) as i64))))?;
        }
    }
    let top = 2 * series.k_max + delta as usize;
    let orders: Vec<usize> = (delta as usize..=top.saturating_sub(2)).step_by(2).collect();
    Ok(report_from(case, res, orders))
}

/// Adaptive Gauss–Kronrod (7/15) quadrature.
pub fn integrate_gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
            k += WGK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, (k - g).abs() * h)
    }
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (k, err) = rule(f, a, b);
        if err <= tol || depth == 0 {
            return k;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    recurse(f, a, b, tol, 40)
}

/// Solutions on which the conservation law is checked, with `s = t - c > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Conserved {
    /// `s^{-1/2} e^{-z²/(2s)}`.
    Gaussian,
    /// `z s^{-3/2} e^{-z²/(2s)}`.
    Odd,
    /// `∂_z^k` of the Gaussian.
    Derivative(usize),
}

impl Conserved {
    /// Polynomial `P` with `ψ(z, s) = s^{-(deg+1)/2} P(z/√s) e^{-z²/(2s)}`, up to sign.
    fn profile(&self) -> (crate::algebra::UniPoly, f64) {
        match *self {
            Conserved::Gaussian => (hermite(0), 1.0),
            Conserved::Odd => (hermite(1), 1.0),
            Conserved::Derivative(k) => (hermite(k), if k % 2 == 0 { 1.0 } else { -1.0 }),
        }
    }

    pub fn eval(&self, z: f64, s: f64) -> f64 {
        let (p, sign) = self.profile();
        let k = p.degree().unwrap_or(0) as f64;
        let y = z / s.sqrt();
        sign * s.powf(-(k + 1.0) / 2.0) * p.eval(&y) * (-0.5 * y * y).exp()
    }

    pub fn exact(&self) -> f64 {
        match *self {
            Conserved::Gaussian | Conserved::Derivative(0) => (2.0 * std::f64::consts::PI).sqrt(),
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub s: f64,
    pub value: f64,
    pub z_max: f64,
    pub tail_bound: f64,
}

/// Bound on `∫_Y^∞ y^j e^{-y²/2} dy` for `Y² > j`.
fn moment_tail(j: u32, y: f64) -> f64 {
    let jm = j as f64 - 1.0;
    let ratio = if y * y > jm { 1.0 / (1.0 - jm.max(0.0) / (y * y)) } else { f64::INFINITY };
    y.powf(jm) * (-0.5 * y * y).exp() * ratio
}

/// `I(t) = ∫ ψ(z,t) dz` over `|z| <= Z`, with `Z` grown until the Gaussian tail bound drops below `tol`.
pub fn conservation_integral(case: Conserved, s_values: &[f64], tol: f64) -> Vec<QuadResult> {
    let (p, _) = case.profile();
    let k = p.degree().unwrap_or(0) as u32;
    let abs_coeffs: Vec<f64> = p.coeffs().iter().map(|c| rational_to_f64(c).abs()).collect();
    s_values
        .iter()
        .map(|&s| {
            // in y = z/√s the integrand is s^{-k/2} P(y) e^{-y²/2} dy
            let scale = s.powf(-(k as f64) / 2.0);
            let mut y = 4.0;
            let tail = |y: f64| {
                2.0 * scale
                    * abs_coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * moment_tail(j as u32, y))
                        .sum::<f64>()
            };
            while tail(y) > tol * 1e-2 {
                y += 0.5;
            }
            let z_max = y * s.sqrt();
            let f = |z: f64| case.eval(z, s);
            let value = integrate_gk15(&f, -z_max, 0.0, tol * 1e-2) + integrate_gk15(&f, 0.0, z_max, tol * 1e-2);
            QuadResult { s, value, z_max, tail_bound: tail(y) }
        })
        .collect()
}

/// Normalizations for the polynomial-times-Gaussian solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HermiteForm {
    /// `s^{-(k+1)/2} He_k(z/√s) e^{-z²/(2s)}`, proportional to `∂_z^k` of the Gaussian.
    Heat,
    /// `s^{-1/2} He_k(z/√s) e^{-z²/(2s)}`.
    UnitPrefactor,
    /// `s^{-(k+1)/2} (z/√s)^k e^{-z²/(2s)}`.
    Monomial,
}

/// Laurent polynomial in `z` and `σ = √s`.
type Laurent = BTreeMap<(u32, i32), Rational>;

fn laurent_add(out: &mut Laurent, key: (u32, i32), c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = out.entry(key).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        out.remove(&key);
    }
}

/// Checks exactly that `ψ = φ(z, s) e^{-z²/(2s)}` solves the heat equation by
/// testing `φ_s = ½φ_zz - (z/s)φ_z - φ/(2s)` with `φ` a Laurent polynomial in `(z, √s)`.
pub fn polynomial_solution_check(k: usize, form: HermiteForm) -> bool {
    let poly = match form {
        HermiteForm::Monomial => crate::algebra::UniPoly::monomial(int(1), k),
        _ => hermite(k),
    };
    let prefactor = match form {
        HermiteForm::UnitPrefactor => -1,
        _ => -(k as i32) - 1,
    };
    // φ = σ^prefactor Σ c_m (z/σ)^m
    let mut phi = Laurent::new();
    for (m, c) in poly.coeffs().iter().enumerate() {
        laurent_add(&mut phi, (m as u32, prefactor - m as i32), c.clone());
    }
    let mut residual = Laurent::new();
    let half = Rational::new(1.into(), 2.into());
    for (&(i, j), c) in &phi {
        // φ_s: ∂_s σ^j = (j/2) σ^{j-2}
        laurent_add(&mut residual, (i, j - 2), c * Rational::new(j.into(), 2.into()));
        // -½φ_zz
        if i >= 2 {
            laurent_add(&mut residual, (i - 2, j), -(c * int((i * (i - 1)) as i64) * &half));
        }
        // +(z/s)φ_z = i z^i σ^{j-2}
        if i >= 1 {
            laurent_add(&mut residual, (i, j - 2), c * int(i as i64));
        }
        // +φ/(2s)
        laurent_add(&mut residual, (i, j - 2), c * &half);
    }
    residual.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, GradedMonomial};
    use crate::dynsys::{integrate_rk4, SystemState, DEFAULT_GUARD};
    use crate::phi::{build_phi, default_c};

    fn p2(c4: i64) -> GradedPoly {
        GradedPoly::term(int(c4), GradedMonomial::from_pairs(&[(2, 2)]))
    }

    #[test]
    fn psi_at_origin() {
        let cf = ClosedFormN0 { a: 1.0, b: -1.0, r0: 0.3, delta: 0 };
        let sol = AnsatzSolution { series: HurwitzSeries::new(0, vec![]), provider: &cf };
        let v = psi_eval(&sol, 0.0, 1.0).unwrap().value;
        assert!((v - (0.3f64).exp() * 2f64.powf(-0.5)).abs() < 1e-15);
        let cf1 = ClosedFormN0 { delta: 1, ..cf.clone() };
        let sol1 = AnsatzSolution { series: HurwitzSeries::new(1, vec![]), provider: &cf1 };
        assert_eq!(psi_eval(&sol1, 0.0, 1.0).unwrap().value, 0.0);
        let (z, t) = (0.4, 0.7);
        let expected = 0.3f64.exp() * (t + 1.0f64).powf(-1.5) * (-z * z / (2.0 * (t + 1.0))).exp() * z;
        assert!((psi_eval(&sol1, z, t).unwrap().value - expected).abs() < 1e-15);
    }

    #[test]
    fn symbolic_n1() {
        for delta in [0u8, 1] {
            let spec = SystemSpec::reduced(1, &GradedPoly::zero(), delta).unwrap();
            let s = build_phi(1, &GradedPoly::zero(), &default_c(delta), delta, 8).unwrap();
            let rep = symbolic_heat_residual("n1", &spec, &s).unwrap();
            assert!(rep.passes(), "{:?}", rep.residuals);
            let mut bad = s.clone();
            *bad.phi_mut(4) = bad.phi(4).add(&p2(1)).unwrap();
            let rep = symbolic_heat_residual("n1", &spec, &bad).unwrap();
            assert_eq!(rep.first_failure, Some(8 + delta as usize - 2));
        }
    }

    #[test]
    fn symbolic_n2_and_flow_fault() {
        let spec = SystemSpec::reduced(2, &p2(24), 1).unwrap();
        let s = build_phi(2, &p2(24), &default_c(1), 1, 6).unwrap();
        assert!(symbolic_heat_residual("n2", &spec, &s).unwrap().passes());
        let wrong = SystemSpec::reduced(2, &p2(23), 1).unwrap();
        assert!(!symbolic_heat_residual("n2", &wrong, &s).unwrap().passes());
    }

    #[test]
    fn symbolic_psi_example() {
        let flows = crate::phi::three_pole_flows();
        let s = crate::phi::build_psi(2, &flows, &crate::phi::three_pole_psi1(), 0, 6).unwrap();
        assert!(symbolic_psi_residual("psi", &flows, &s).unwrap().passes());
    }

    #[test]
    fn numeric_n0_is_fd_only() {
        let cf = ClosedFormN0 { a: 1.0, b: -1.0, r0: 0.0, delta: 0 };
        let sol = AnsatzSolution { series: HurwitzSeries::new(0, vec![]), provider: &cf };
        let rep = numeric_heat_residual("n0", &sol, &linspace(-0.5, 0.5, 5), &linspace(0.1, 0.3, 3), 1e-3).unwrap();
        assert!(rep.truncation_component < 1e-14);
        assert!(rep.max_residual < 1e-6);
    }

    #[test]
    fn numeric_n2_trajectory() {
        let spec = SystemSpec::reduced(2, &p2(24), 1).unwrap();
        let s0 = SystemState::new(0.0, 0.0, 0.3, vec![0.4, -0.2]);
        let traj = integrate_rk4(&spec, &s0, &0.4, &1e-3, DEFAULT_GUARD).unwrap();
        let s = build_phi(2, &p2(24), &default_c(1), 1, 8).unwrap();
        let sol = AnsatzSolution { series: HurwitzSeries::from_phi(&s), provider: &traj };
        let zs = linspace(-0.5, 0.5, 11);
        let ts = linspace(0.1, 0.3, 5);
        let a = numeric_heat_residual("n2", &sol, &zs, &ts, 1e-3).unwrap();
        let b = numeric_heat_residual("n2", &sol, &zs, &ts, 5e-4).unwrap();
        assert!(a.max_residual < 1e-6, "{a:?}");
        let ratio = a.fd_component / b.fd_component;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
        assert!(r_consistency(&traj) < 1e-10);
    }

    #[test]
    fn rational_lift_matches_flow() {
        let rh = RationalH::new(int(3), vec![rat(-1, 1), rat(-2, 1), rat(-3, 1)]).unwrap();
        let lift = RationalLift { rh, n: 2, delta: 0, r0: 0.0 };
        let s = build_phi(2, &p2(-3), &default_c(0), 0, 8).unwrap();
        let sol = AnsatzSolution { series: HurwitzSeries::from_phi(&s), provider: &lift };
        let rep = numeric_heat_residual("lift", &sol, &linspace(-0.5, 0.5, 5), &[1.0, 1.1], 1e-3).unwrap();
        assert!(rep.max_residual < 1e-6, "{rep:?}");
    }

    #[test]
    fn hermite_forms() {
        for k in 0..=10 {
            assert!(polynomial_solution_check(k, HermiteForm::Heat));
            assert_eq!(polynomial_solution_check(k, HermiteForm::UnitPrefactor), k == 0);
            assert_eq!(polynomial_solution_check(k, HermiteForm::Monomial), k <= 1);
        }
    }

    #[test]
    fn conservation() {
        let g = conservation_integral(Conserved::Gaussian, &[1.0, 2.0, 4.0], 1e-12);
        for q in &g {
            assert!((q.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        }
        for case in [Conserved::Odd, Conserved::Derivative(1), Conserved::Derivative(4)] {
            for q in conservation_integral(case, &[1.0, 2.0, 4.0], 1e-12) {
                assert!(q.value.abs() < 1e-10, "{case:?} {q:?}");
            }
        }
    }

    #[test]
    fn gk15_polynomial_exact() {
        let v = integrate_gk15(&|x| x.powi(6), 0.0, 1.0, 1e-14);
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
    }
}
