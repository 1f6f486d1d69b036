//! Browser bindings. Each export takes plain strings and numbers and returns a
//! JSON string; errors come back as a thrown string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use heatode::algebra::{int, vn_basis, Rational};
use heatode::dynsys::{eval_rational_h, integrate_rk4, RationalH, SystemSpec, SystemState, DEFAULT_GUARD};
use heatode::input::{parse_float_list, parse_pn, parse_rational_list, pn_names};
use heatode::jetcalc::build_d_family;
use heatode::verify::matched_pn;

fn err(e: impl ToString) -> String {
    e.to_string()
}

/// The equation for `(n, P)` plus the coefficient names `P` may use.
pub fn ode_info(n: usize, p: &str) -> Result<Value, String> {
    if n > 8 {
        return Err("n is limited to 8 here".into());
    }
    let pn = parse_pn(n, p).map_err(err)?;
    let ode = build_d_family(n, &pn).map_err(err)?;
    let basis: Vec<Value> = vn_basis(n)
        .iter()
        .zip(pn_names(n))
        .map(|(m, name)| json!({"name": name, "monomial": m.to_string()}))
        .collect();
    Ok(json!({"n": n, "P": pn.to_string(), "text": format!("{ode} = 0"), "basis": basis}))
}

/// Float RK4 trajectory of the reduced system with the default `c`.
pub fn trajectory(n: usize, p: &str, delta: u8, h0: f64, x0: &str, t_end: f64, step: f64) -> Result<Value, String> {
    if delta > 1 {
        return Err("delta must be 0 or 1".into());
    }
    if !(step > 0.0) || !(t_end > 0.0) || t_end / step > 100_000.0 {
        return Err("need 0 < step and at most 100000 steps".into());
    }
    let pn = parse_pn(n, p).map_err(err)?;
    let spec = SystemSpec::reduced(n, &pn, delta).map_err(err)?;
    let mut x = parse_float_list(x0).map_err(err)?;
    if x.len() > n {
        return Err(format!("{} initial x values for n = {n}", x.len()));
    }
    x.resize(n, 0.0);
    let s0 = SystemState::new(0.0, 0.0, h0, x);
    match integrate_rk4(&spec, &s0, &t_end, &step, DEFAULT_GUARD) {
        Ok(traj) => Ok(json!({
            "t": traj.states.iter().map(|s| s.t).collect::<Vec<_>>(),
            "h": traj.states.iter().map(|s| s.h).collect::<Vec<_>>(),
            "r": traj.states.iter().map(|s| s.r).collect::<Vec<_>>(),
            "blow_up": null,
        })),
        Err(heatode::Error::BlowUp { t }) => Ok(json!({"t": [], "h": [], "r": [], "blow_up": t})),
        Err(e) => Err(e.to_string()),
    }
}

/// `h = (1/(n+1)) sum 1/(t - a_k)` sampled on `[t0, t1]`, with the exact
/// residual of the matching equation at a few rational points.
pub fn pole_sum(poles: &str, t0: f64, t1: f64, samples: usize) -> Result<Value, String> {
    let poles: Vec<Rational> = parse_rational_list(poles).map_err(err)?;
    if poles.is_empty() || poles.len() > 5 {
        return Err("give between 1 and 5 poles".into());
    }
    if !(t1 > t0) || !(2..=5000).contains(&samples) {
        return Err("need t0 < t1 and 2..5000 samples".into());
    }
    let n = poles.len() - 1;
    let rh = RationalH::new(int(n as i64 + 1), poles.clone()).map_err(err)?;
    let step = (t1 - t0) / (samples - 1) as f64;
    let h: Vec<Value> = (0..samples)
        .map(|i| {
            let t = t0 + step * i as f64;
            match eval_rational_h(&rh, &t, 0) {
                Ok(v) if v[0].abs() < 1e6 => json!(v[0]),
                _ => Value::Null,
            }
        })
        .collect();
    let ode = build_d_family(n, &matched_pn(n)).map_err(err)?;
    let checks: Vec<Value> = (0..4)
        .filter_map(|k| {
            let t = poles.iter().fold(int(0), |acc, a| acc + a) + Rational::new((2 * k + 1).into(), 3.into());
            let jet = eval_rational_h(&rh, &t, n + 1).ok()?;
            let r = ode.eval(&jet).ok()?;
            Some(json!({"t": t.to_string(), "residual": r.to_string()}))
        })
        .collect();
    Ok(json!({
        "t0": t0,
        "step": step,
        "h": h,
        "ode": if n <= 4 { Some(format!("{ode} = 0")) } else { None },
        "checks": if n <= 4 { checks } else { Vec::new() },
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = odeInfo)]
pub fn ode_info_js(n: usize, p: &str) -> Result<String, JsValue> {
    to_js(ode_info(n, p))
}

#[wasm_bindgen(js_name = trajectory)]
pub fn trajectory_js(n: usize, p: &str, delta: u8, h0: f64, x0: &str, t_end: f64, step: f64) -> Result<String, JsValue> {
    to_js(trajectory(n, p, delta, h0, x0, t_end, step))
}

#[wasm_bindgen(js_name = poleSum)]
pub fn pole_sum_js(poles: &str, t0: f64, t1: f64, samples: usize) -> Result<String, JsValue> {
    to_js(pole_sum(poles, t0, t1, samples))
}
