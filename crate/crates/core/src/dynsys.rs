//! Graded polynomial dynamical systems in `(r, h, x_2, ..., x_{n+1})`.
//!
//! The flow is
//! `dr/dt = -(δ+1/2) h`, `dh/dt = -h^2 - κ x_2`,
//! `dx_k/dt = p_{k+1}(x) - 2k h x_k`, with `κ = c/(2(1+2δ))`.
//! At the default `c = -2(1+2δ)` this is `dh/dt = -h^2 + x_2`.

use serde_json::{json, Value};

use crate::algebra::{
    check_in_vn, fmt_rational_pq, int, reduced_flows, GradedMonomial, GradedPoly, Rational,
    Scalar,
};
use crate::error::{Error, Result};
use crate::jetcalc::{build_dn, JetPoly};
use crate::phi::{default_c, kappa};

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub delta: u8,
    pub c: Rational,
    /// `(k, p_{k+1})` for `k = 2..=n+1`.
    pub flows: Vec<(usize, GradedPoly)>,
}

impl SystemSpec {
    /// Reduced system `p_{k+1} = x_{k+1}`, `p_{n+2} = P_n`, at the default `c`.
    pub fn reduced(n: usize, pn: &GradedPoly, delta: u8) -> Result<Self> {
        Self::reduced_with_c(n, pn, &default_c(delta), delta)
    }

    pub fn reduced_with_c(n: usize, pn: &GradedPoly, c: &Rational, delta: u8) -> Result<Self> {
        check_in_vn(n, pn)?;
        Self::general(n, reduced_flows(n, pn), c, delta)
    }

    pub fn general(n: usize, flows: Vec<(usize, GradedPoly)>, c: &Rational, delta: u8) -> Result<Self> {
        if delta > 1 {
            return Err(Error::InvalidArgument(format!("delta must be 0 or 1, got {delta}")));
        }
        let mut seen = vec![false; n + 2];
        for (k, p) in &flows {
            if !(2..=n + 1).contains(k) || seen[*k] {
                return Err(Error::InvalidArgument(format!("flow for x{k} is misplaced")));
            }
            seen[*k] = true;
            let expected = 2 * (*k as u32 + 1);
            if let Some(found) = p.weight() {
                if found != expected {
                    return Err(Error::WeightMismatch { expected, found });
                }
            }
            if p.max_var().is_some_and(|v| v > n + 1) {
                return Err(Error::InvalidArgument(format!("p{} uses variables beyond x{}", k + 1, n + 1)));
            }
        }
        let mut flows = flows;
        for k in 2..=n + 1 {
            if !seen[k] {
                flows.push((k, GradedPoly::zero()));
            }
        }
        flows.sort_by_key(|(k, _)| *k);
        Ok(SystemSpec { n, delta, c: c.clone(), flows })
    }

    pub fn kappa(&self) -> Rational {
        kappa(&self.c, self.delta)
    }

    /// `p_{k+1}`.
    pub fn flow(&self, k: usize) -> GradedPoly {
        self.flows
            .iter()
            .find(|(j, _)| *j == k)
            .map(|(_, p)| p.clone())
            .unwrap_or_default()
    }

    /// Whether `p_{k+1} = x_{k+1}` for `k <= n` (the closing polynomial is then `flow(n+1)`).
    pub fn is_reduced(&self) -> bool {
        (2..=self.n).all(|k| self.flow(k) == GradedPoly::var(k + 1))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "delta": self.delta,
            "c": fmt_rational_pq(&self.c),
            "flows": self.flows.iter()
                .map(|(k, p)| json!({"x": k, "p": p.to_string()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// A point `(t, r, h, x_2, ..., x_{n+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState<T> {
    pub t: T,
    pub r: T,
    pub h: T,
    /// `x[i]` is `x_{i+2}`.
    pub x: Vec<T>,
}

impl<T: Scalar> SystemState<T> {
    pub fn new(t: T, r: T, h: T, x: Vec<T>) -> Self {
        SystemState { t, r, h, x }
    }

    /// `x_k`, with `x_k = 0` outside the stored range.
    pub fn xk(&self, k: usize) -> T {
        k.checked_sub(2)
            .and_then(|i| self.x.get(i).cloned())
            .unwrap_or_else(T::zero)
    }
}

/// Time derivative of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates<T> {
    pub r: T,
    pub h: T,
    pub x: Vec<T>,
}

pub fn vector_field<T: Scalar>(spec: &SystemSpec, s: &SystemState<T>) -> Result<Rates<T>> {
    if s.x.len() != spec.n {
        return Err(Error::InvalidArgument(format!(
            "state has {} x-coordinates, system needs {}",
            s.x.len(),
            spec.n
        )));
    }
    let half = T::from_rat(&Rational::new(1.into(), 2.into()));
    let delta = T::from_i64(spec.delta as i64);
    let kap = T::from_rat(&spec.kappa());
    let r = -(delta + half) * s.h.clone();
    let h = -(s.h.clone() * s.h.clone()) - kap * s.xk(2);
    let value = |k: usize| s.xk(k);
    let x = spec
        .flows
        .iter()
        .map(|(k, p)| p.eval(&value) - T::from_i64(2 * *k as i64) * s.h.clone() * s.xk(*k))
        .collect();
    Ok(Rates { r, h, x })
}

fn advance<T: Scalar>(s: &SystemState<T>, k: &Rates<T>, dt: &T) -> SystemState<T> {
    SystemState {
        t: s.t.clone() + dt.clone(),
        r: s.r.clone() + dt.clone() * k.r.clone(),
        h: s.h.clone() + dt.clone() * k.h.clone(),
        x: s
            .x
            .iter()
            .zip(&k.x)
            .map(|(x, v)| x.clone() + dt.clone() * v.clone())
            .collect(),
    }
}

/// One classical RK4 step of size `dt`.
pub fn rk4_step<T: Scalar>(spec: &SystemSpec, s: &SystemState<T>, dt: &T) -> Result<SystemState<T>> {
    let two = T::from_i64(2);
    let six = T::from_i64(6);
    let half_dt = dt.clone() / two.clone();
    let k1 = vector_field(spec, s)?;
    let k2 = vector_field(spec, &advance(s, &k1, &half_dt))?;
    let k3 = vector_field(spec, &advance(s, &k2, &half_dt))?;
    let k4 = vector_field(spec, &advance(s, &k3, dt))?;
    let combine = |a: &T, b: &T, c: &T, d: &T| {
        (a.clone() + two.clone() * b.clone() + two.clone() * c.clone() + d.clone()) / six.clone()
    };
    let rates = Rates {
        r: combine(&k1.r, &k2.r, &k3.r, &k4.r),
        h: combine(&k1.h, &k2.h, &k3.h, &k4.h),
        x: (0..s.x.len())
            .map(|i| combine(&k1.x[i], &k2.x[i], &k3.x[i], &k4.x[i]))
            .collect(),
    };
    Ok(advance(s, &rates, dt))
}

/// Default blow-up threshold on `|h|`.
pub const DEFAULT_GUARD: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub spec: SystemSpec,
    pub step: T,
    pub guard: f64,
    pub states: Vec<SystemState<T>>,
}

/// Fixed-step RK4 from `s0` to `t_end`; the last step is shortened to land on `t_end`.
pub fn integrate_rk4<T: Scalar>(
    spec: &SystemSpec,
    s0: &SystemState<T>,
    t_end: &T,
    step: &T,
    guard: f64,
) -> Result<Trajectory<T>> {
    if *step <= T::zero() {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let span = (t_end.clone() - s0.t.clone()).as_f64();
    if span < 0.0 {
        return Err(Error::InvalidArgument("t_end precedes the initial time".into()));
    }
    let steps = (span / step.as_f64() - 1e-9).ceil().max(0.0) as usize;
    let mut states = vec![s0.clone()];
    let mut s = s0.clone();
    for i in 0..steps {
        let dt = if i + 1 == steps { t_end.clone() - s.t.clone() } else { step.clone() };
        s = rk4_step(spec, &s, &dt)?;
        let h = s.h.as_f64();
        if !h.is_finite() || h.abs() > guard {
            return Err(Error::BlowUp { t: s.t.as_f64() });
        }
        states.push(s.clone());
    }
    Ok(Trajectory { spec: spec.clone(), step: step.clone(), guard, states })
}

impl<T: Scalar> Trajectory<T> {
    pub fn header(&self) -> String {
        let mut cols = vec!["t".to_string(), "r".into(), "h".into()];
        cols.extend((2..=self.spec.n + 1).map(|k| format!("x{k}")));
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for s in &self.states {
            let mut row = vec![s.t.to_text(), s.r.to_text(), s.h.to_text()];
            row.extend(s.x.iter().map(Scalar::to_text));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, mode: &str) -> Value {
        let rows: Vec<Vec<String>> = self
            .states
            .iter()
            .map(|s| {
                let mut row = vec![s.t.to_text(), s.r.to_text(), s.h.to_text()];
                row.extend(s.x.iter().map(Scalar::to_text));
                row
            })
            .collect();
        json!({
            "spec": self.spec.to_json(),
            "step": self.step.to_text(),
            "guard": self.guard,
            "mode": mode,
            "columns": self.header().split(',').collect::<Vec<_>>(),
            "rows": rows,
        })
    }
}

impl Trajectory<f64> {
    pub fn t_range(&self) -> (f64, f64) {
        let first = self.states.first().map_or(0.0, |s| s.t);
        let last = self.states.last().map_or(0.0, |s| s.t);
        (first, last)
    }

    /// State at `t`, integrated with RK4 sub-steps from the stored node at or below `t`.
    pub fn state_at(&self, t: f64) -> Result<SystemState<f64>> {
        let (lo, hi) = self.t_range();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { t });
        }
        let idx = self.states.partition_point(|s| s.t <= t).saturating_sub(1);
        let mut s = self.states[idx].clone();
        let gap = t - s.t;
        if gap > 0.0 {
            let pieces = (gap / self.step).ceil().max(1.0) as usize;
            let dt = gap / pieces as f64;
            for _ in 0..pieces {
                s = rk4_step(&self.spec, &s, &dt)?;
            }
        }
        s.t = t;
        Ok(s)
    }
}

/// `h(t) = (1/b) Σ_k 1/(t - a_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalH {
    pub b: Rational,
    pub poles: Vec<Rational>,
}

impl RationalH {
    pub fn new(b: Rational, poles: Vec<Rational>) -> Result<Self> {
        if b == int(0) {
            return Err(Error::InvalidArgument("b must be nonzero".into()));
        }
        for (i, a) in poles.iter().enumerate() {
            if poles[..i].contains(a) {
                return Err(Error::InvalidArgument(format!("repeated pole {}", fmt_rational_pq(a))));
            }
        }
        Ok(RationalH { b, poles })
    }
}

/// `h^(q)(t) = (1/b) Σ_k (-1)^q q!/(t - a_k)^{q+1}` for `q = 0..=max_order`.
pub fn eval_rational_h<T: Scalar>(rh: &RationalH, t: &T, max_order: usize) -> Result<Vec<T>> {
    let inv_b = T::from_rat(&rh.b.recip());
    let mut jet = vec![T::zero(); max_order + 1];
    for a in &rh.poles {
        let d = t.clone() - T::from_rat(a);
        if d.is_zero() {
            return Err(Error::PoleHit);
        }
        let u = T::one() / d;
        // (-1)^q q! u^{q+1}
        let mut term = u.clone();
        for (q, slot) in jet.iter_mut().enumerate() {
            *slot = slot.clone() + term.clone();
            term = -(term * u.clone() * T::from_i64(q as i64 + 1));
        }
    }
    Ok(jet.into_iter().map(|v| v * inv_b.clone()).collect())
}

/// Symbolic lift `x_{k+1} = D_k(h)` for `k = 1..=n`.
pub fn lift_polys(n: usize) -> Vec<JetPoly> {
    (1..=n).map(build_dn).collect()
}

/// `(x_2, ..., x_{n+1})` from the jet `(h, h', ..., h^(n))`.
pub fn lift_from_h<T: Scalar>(jet: &[T], n: usize) -> Result<Vec<T>> {
    lift_polys(n).iter().map(|p| p.eval(jet)).collect()
}

/// The differential polynomial evaluated at a jet.
pub fn ode_residual<T: Scalar>(ode: &JetPoly, jet: &[T]) -> Result<T> {
    ode.eval(jet)
}

/// Triangular change of variables `X_k = c_k x_k + q_k(x_2, ..., x_{k-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTransform {
    /// `c_2, ..., c_{n+1}`.
    pub diag: Vec<Rational>,
    /// `q_2, ..., q_{n+1}` (`q_2` must be zero).
    pub shear: Vec<GradedPoly>,
}

impl PolyTransform {
    pub fn identity(n: usize) -> Self {
        Self::diagonal(vec![int(1); n])
    }

    pub fn diagonal(diag: Vec<Rational>) -> Self {
        let shear = vec![GradedPoly::zero(); diag.len()];
        PolyTransform { diag, shear }
    }

    fn check(&self) -> Result<()> {
        for (i, c) in self.diag.iter().enumerate() {
            if *c == int(0) {
                return Err(Error::SingularTransform(i + 2));
            }
        }
        for (i, q) in self.shear.iter().enumerate() {
            let k = i + 2;
            if let Some(found) = q.weight() {
                if found != 2 * k as u32 {
                    return Err(Error::WeightMismatch { expected: 2 * k as u32, found });
                }
            }
            if q.max_var().is_some_and(|v| v >= k) {
                return Err(Error::InvalidArgument(format!("q{k} must only involve x2..x{}", k - 1)));
            }
        }
        Ok(())
    }

    /// `X_k` as a polynomial in the old coordinates.
    pub fn forward(&self, k: usize) -> GradedPoly {
        let i = k - 2;
        GradedPoly::term(self.diag[i].clone(), GradedMonomial::var(k))
            .add(&self.shear[i])
            .expect("q_k shares the weight of x_k")
    }

    /// Old coordinates `x_k` as polynomials in the new ones.
    pub fn inverse(&self) -> Result<Vec<GradedPoly>> {
        self.check()?;
        let mut inv: Vec<GradedPoly> = Vec::with_capacity(self.diag.len());
        for (i, c) in self.diag.iter().enumerate() {
            let k = i + 2;
            let earlier = inv.clone();
            let q_new = self.shear[i].substitute(&|j| earlier.get(j - 2).cloned())?;
            let xk = GradedPoly::var(k).sub(&q_new)?.scale(&c.recip());
            inv.push(xk);
        }
        Ok(inv)
    }
}

/// Rewrites the system in the coordinates `X = T(x)`:
/// `dX_k/dτ = c_k p_{k+1} + Σ_j ∂_j q_k p_{j+1}`, expressed in `X`, and `c -> c/c_2`.
pub fn scale_action(spec: &SystemSpec, transform: &PolyTransform) -> Result<SystemSpec> {
    if transform.diag.len() != spec.n {
        return Err(Error::InvalidArgument(format!(
            "transform has {} coordinates, system has {}",
            transform.diag.len(),
            spec.n
        )));
    }
    let inv = transform.inverse()?;
    let back = |j: usize| inv.get(j - 2).cloned();
    let mut flows = Vec::new();
    for k in 2..=spec.n + 1 {
        let rate_old = transform.forward(k).derivation(&spec.flows)?;
        flows.push((k, rate_old.substitute(&back)?));
    }
    let c = if spec.n == 0 { spec.c.clone() } else { &spec.c / &transform.diag[0] };
    SystemSpec::general(spec.n, flows, &c, spec.delta)
}

/// The system `g_2' = 6 g_3 - 4h g_2`, `g_3' = g_2^2/3 - 6h g_3`, `h' = -h^2 + g_2/12`.
pub fn sigma_system() -> SystemSpec {
    let flows = vec![
        (2, GradedPoly::term(int(6), GradedMonomial::var(3))),
        (3, GradedPoly::term(Rational::new(1.into(), 3.into()), GradedMonomial::from_pairs(&[(2, 2)]))),
    ];
    SystemSpec::general(2, flows, &Rational::new((-1).into(), 2.into()), 1).expect("weights are consistent")
}

/// The same with a constant-in-τ `g_4`: `g_3' = g_2^2/3 + 2 g_4 - 6h g_3`, `g_4' = -8h g_4`.
pub fn sigma_system_g4() -> SystemSpec {
    let flows = vec![
        (2, GradedPoly::term(int(6), GradedMonomial::var(3))),
        (
            3,
            GradedPoly::from_terms([
                (GradedMonomial::from_pairs(&[(2, 2)]), Rational::new(1.into(), 3.into())),
                (GradedMonomial::var(4), int(2)),
            ])
            .expect("weight 8"),
        ),
        (4, GradedPoly::zero()),
    ];
    SystemSpec::general(3, flows, &Rational::new((-1).into(), 2.into()), 1).expect("weights are consistent")
}

/// Result of bringing the sigma systems to reduced form.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaReduction {
    pub n2: SystemSpec,
    pub n3: SystemSpec,
    /// `c_4` read off the reduced `n = 2` system.
    pub c4: Option<Rational>,
    /// `c_5` read off the reduced `n = 3` system.
    pub c5: Option<Rational>,
}

/// Applies `x_2 = g_2/12`, `x_3 = g_3/2` (and `x_4 = g_4 + g_2^2/6`) and reads the closing constants.
pub fn reduce_sigma_system() -> Result<SigmaReduction> {
    let half = Rational::new(1.into(), 2.into());
    let twelfth = Rational::new(1.into(), 12.into());
    let n2 = scale_action(&sigma_system(), &PolyTransform::diagonal(vec![twelfth.clone(), half.clone()]))?;
    let shear4 = GradedPoly::term(Rational::new(1.into(), 6.into()), GradedMonomial::from_pairs(&[(2, 2)]));
    let t3 = PolyTransform {
        diag: vec![twelfth, half, int(1)],
        shear: vec![GradedPoly::zero(), GradedPoly::zero(), shear4],
    };
    let n3 = scale_action(&sigma_system_g4(), &t3)?;
    let coeff_if_reduced = |spec: &SystemSpec, m: GradedMonomial| {
        let p = spec.flow(spec.n + 1);
        (spec.is_reduced() && p.len() == 1).then(|| p.coeff(&m)).filter(|c| *c != int(0))
    };
    let c4 = coeff_if_reduced(&n2, GradedMonomial::from_pairs(&[(2, 2)]));
    let c5 = coeff_if_reduced(&n3, GradedMonomial::from_pairs(&[(2, 1), (3, 1)]));
    Ok(SigmaReduction { n2, n3, c4, c5 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::jetcalc::{build_d_family, det_sn};

    fn p2(c4: i64) -> GradedPoly {
        GradedPoly::term(int(c4), GradedMonomial::from_pairs(&[(2, 2)]))
    }

    #[test]
    fn vector_field_examples() {
        let s0 = SystemSpec::reduced(0, &GradedPoly::zero(), 0).unwrap();
        let st = SystemState::new(int(0), int(5), int(3), vec![]);
        let v = vector_field(&s0, &st).unwrap();
        assert_eq!((v.r, v.h), (rat(-3, 2), int(-9)));

        let s2 = SystemSpec::reduced(2, &p2(7), 1).unwrap();
        let st = SystemState::new(int(0), int(0), int(2), vec![int(3), int(5)]);
        let v = vector_field(&s2, &st).unwrap();
        assert_eq!(v.h, int(-4 + 3));
        assert_eq!(v.x, vec![int(5 - 4 * 2 * 3), int(7 * 9 - 6 * 2 * 5)]);

        let zero = SystemState::new(int(0), int(0), int(0), vec![int(0), int(0)]);
        let v = vector_field(&s2, &zero).unwrap();
        assert!(v.r == int(0) && v.h == int(0) && v.x.iter().all(|x| *x == int(0)));
    }

    #[test]
    fn general_form_matches_reduced_at_default_c() {
        let spec = SystemSpec::reduced(2, &p2(24), 0).unwrap();
        assert_eq!(spec.kappa(), int(-1));
        let other = SystemSpec::reduced_with_c(2, &p2(24), &int(6), 0).unwrap();
        let st = SystemState::new(0.0, 0.0, 0.5, vec![0.25, 0.125]);
        let a = vector_field(&spec, &st).unwrap();
        let b = vector_field(&other, &st).unwrap();
        assert_eq!(a.h, -0.25 + 0.25);
        assert_eq!(b.h, -0.25 - 3.0 * 0.25);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn rk4_n0_accuracy_and_guard() {
        let spec = SystemSpec::reduced(0, &GradedPoly::zero(), 0).unwrap();
        let s0 = SystemState::new(0.0, 0.0, 1.0, vec![]);
        let traj = integrate_rk4(&spec, &s0, &1.0, &0.01, DEFAULT_GUARD).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.t - 1.0).abs() < 1e-12);
        assert!((last.h - 0.5).abs() < 1e-9);
        // r = -ln(1+t)/2
        assert!((last.r + 0.5 * 2f64.ln()).abs() < 1e-9);

        let s0 = SystemState::new(0.0, 0.0, -1.0, vec![]);
        assert!(matches!(
            integrate_rk4(&spec, &s0, &2.0, &0.01, DEFAULT_GUARD),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn rk4_exact_mode() {
        let spec = SystemSpec::reduced(0, &GradedPoly::zero(), 0).unwrap();
        let s0 = SystemState::new(int(0), int(0), int(1), vec![]);
        let traj = integrate_rk4(&spec, &s0, &rat(1, 2), &rat(1, 4), DEFAULT_GUARD).unwrap();
        assert_eq!(traj.states.len(), 3);
        assert_eq!(traj.states[2].t, rat(1, 2));
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,r,h\n0/1,0/1,1/1\n1/4,"));
    }

    #[test]
    fn state_at_reproduces_nodes() {
        let spec = SystemSpec::reduced(2, &p2(24), 1).unwrap();
        let s0 = SystemState::new(0.0, 0.0, 0.3, vec![0.2, -0.1]);
        let traj = integrate_rk4(&spec, &s0, &0.5, &0.01, DEFAULT_GUARD).unwrap();
        let s = traj.state_at(0.25).unwrap();
        let node = &traj.states[25];
        assert!((s.h - node.h).abs() < 1e-12);
        let mid = traj.state_at(0.255).unwrap();
        let fine = integrate_rk4(&spec, &s0, &0.255, &0.0001, DEFAULT_GUARD).unwrap();
        assert!((mid.h - fine.states.last().unwrap().h).abs() < 1e-9);
        assert!(matches!(traj.state_at(0.6), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rational_h_jets() {
        let one = RationalH::new(int(1), vec![int(0)]).unwrap();
        assert_eq!(eval_rational_h(&one, &int(1), 2).unwrap(), vec![int(1), int(-1), int(2)]);
        let two = RationalH::new(int(2), vec![int(0), int(2)]).unwrap();
        let jet = eval_rational_h(&two, &int(1), 1).unwrap();
        assert_eq!(jet, vec![int(0), int(-1)]);
        assert_eq!(eval_rational_h(&two, &int(2), 1), Err(Error::PoleHit));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_from_h(&[int(1), int(-1)], 1).unwrap(), vec![int(0)]);
        // h = (1/(t-a) + 1/(t-b))/2 gives x_2 = -(1/(t-a) - 1/(t-b))^2 / 4
        let (a, b, t) = (rat(1, 3), rat(-2, 5), rat(7, 4));
        let rh = RationalH::new(int(2), vec![a.clone(), b.clone()]).unwrap();
        let jet = eval_rational_h(&rh, &t, 2).unwrap();
        let x = lift_from_h(&jet, 1).unwrap();
        let d = (t.clone() - a).recip() - (t - b).recip();
        assert_eq!(x[0], -(&d * &d) / int(4));
        // x_3 = x_2' + 4h x_2
        let x2 = build_dn(1);
        assert_eq!(x2.total_derivative().add(&JetPoly::var(0).mul(&x2).scale(&int(4))), build_dn(2));
    }

    #[test]
    fn residual_examples() {
        let rh = RationalH::new(int(2), vec![rat(1, 2), rat(-3, 7)]).unwrap();
        let jet = eval_rational_h(&rh, &rat(5, 3), 3).unwrap();
        assert_eq!(ode_residual(&build_dn(2), &jet).unwrap(), int(0));
        let rh = RationalH::new(int(3), vec![int(1), int(2), rat(-1, 3)]).unwrap();
        let jet = eval_rational_h(&rh, &rat(11, 5), 4).unwrap();
        assert_eq!(ode_residual(&det_sn(2, &int(3)), &jet).unwrap(), int(0));
        let fam = build_d_family(2, &p2(-3)).unwrap();
        assert_eq!(ode_residual(&fam, &jet).unwrap(), int(0));
        assert_eq!(ode_residual(&build_dn(1), &[int(1), int(0)]).unwrap(), int(1));
        assert_eq!(
            ode_residual(&build_dn(2), &[int(1)]),
            Err(Error::JetTooShort { have: 1, need: 3 })
        );
    }

    #[test]
    fn sigma_reductions() {
        let red = reduce_sigma_system().unwrap();
        assert_eq!(red.c4, Some(int(24)));
        assert_eq!(red.c5, Some(int(48)));
        assert_eq!(red.n2, SystemSpec::reduced(2, &p2(24), 1).unwrap());
        assert_eq!(red.n2.c, int(-6));
        let spec = SystemSpec::reduced(3, &GradedPoly::term(int(5), GradedMonomial::from_pairs(&[(2, 1), (3, 1)])), 0).unwrap();
        assert_eq!(scale_action(&spec, &PolyTransform::identity(3)).unwrap(), spec);
    }

    #[test]
    fn singular_transform_rejected() {
        let spec = SystemSpec::reduced(2, &p2(1), 0).unwrap();
        let t = PolyTransform::diagonal(vec![int(1), int(0)]);
        assert_eq!(scale_action(&spec, &t), Err(Error::SingularTransform(3)));
    }
}
