//! Text input for closing polynomials and rational lists.
//!
//! A closing polynomial `P_n` is written as comma-separated assignments to
//! coefficients of the basis of `V_n`:
//!
//! - `c4=` (n = 2), `c5=` (n = 3), `c62=`, `c63=`, `c64=` (n = 4);
//! - `p[i]=` for the `i`-th basis monomial, counting from 1;
//! - `pJ=` with `J` the exponents of `x2..x_{n+1}` as digits, e.g. `p20=` for `x2^2`.
//!
//! Unassigned coefficients are zero.

use crate::algebra::{parse_rational, vn_basis, GradedMonomial, GradedPoly, Rational};
use crate::error::{Error, Result};

/// Named coefficients of the basis of `V_n`, in basis order.
pub fn pn_names(n: usize) -> Vec<String> {
    let named: &[&str] = match n {
        2 => &["c4"],
        3 => &["c5"],
        4 => &["c62", "c63", "c64"],
        _ => &[],
    };
    (1..=vn_basis(n).len())
        .map(|i| named.get(i - 1).map_or_else(|| format!("p[{i}]"), |s| s.to_string()))
        .collect()
}

/// Multi-index name `pJ` of a monomial in `x2..x_{n+1}`.
pub fn multi_index_name(n: usize, m: &GradedMonomial) -> String {
    let digits: String = (2..=n + 1).map(|k| m.exponent(k).to_string()).collect();
    format!("p{digits}")
}

fn index_of(n: usize, basis: &[GradedMonomial], name: &str) -> Result<usize> {
    if let Some(pos) = pn_names(n).iter().position(|s| s == name) {
        return Ok(pos);
    }
    if let Some(inner) = name.strip_prefix("p[").and_then(|s| s.strip_suffix(']')) {
        let i: usize = inner.parse().map_err(|_| Error::Parse(name.to_string()))?;
        return if (1..=basis.len()).contains(&i) {
            Ok(i - 1)
        } else {
            Err(Error::InvalidArgument(format!("{name}: V_{n} has {} basis monomials", basis.len())))
        };
    }
    if let Some(digits) = name.strip_prefix('p') {
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            if digits.len() != n {
                return Err(Error::InvalidArgument(format!("{name}: expected {n} exponents")));
            }
            return basis
                .iter()
                .position(|m| multi_index_name(n, m) == name)
                .ok_or_else(|| Error::InvalidArgument(format!("{name} is not a monomial of V_{n}")));
        }
    }
    if ["c4", "c5", "c62", "c63", "c64"].contains(&name) {
        return Err(Error::InvalidArgument(format!("{name} does not apply to n = {n}")));
    }
    Err(Error::Parse(name.to_string()))
}

/// Parses `P_n` from the assignment syntax described in the module docs.
pub fn parse_pn(n: usize, text: &str) -> Result<GradedPoly> {
    let basis = vn_basis(n);
    let mut coeffs: Vec<Option<Rational>> = vec![None; basis.len()];
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(|| Error::Parse(part.to_string()))?;
        let i = index_of(n, &basis, name.trim())?;
        if coeffs[i].is_some() {
            return Err(Error::InvalidArgument(format!("{} assigned twice", name.trim())));
        }
        coeffs[i] = Some(parse_rational(value)?);
    }
    GradedPoly::from_terms(
        basis.into_iter().zip(coeffs).filter_map(|(m, c)| c.map(|c| (m, c))),
    )
}

/// Comma-separated exact rationals.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse_rational).collect()
}

/// Comma-separated floats; rationals `p/q` are accepted too.
pub fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_float)
        .collect()
}

pub fn parse_float(s: &str) -> Result<f64> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .or_else(|| parse_rational(s).ok().map(|r| crate::algebra::rational_to_f64(&r)))
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;

    #[test]
    fn named_coefficients() {
        assert_eq!(parse_pn(2, "c4=24").unwrap().to_string(), "24*x2^2");
        assert_eq!(
            parse_pn(4, "c62=-45, c63=-26, c64=-31").unwrap().to_string(),
            "-45*x2^3 - 26*x3^2 - 31*x2*x4"
        );
        assert_eq!(parse_pn(2, "").unwrap(), GradedPoly::zero());
    }

    #[test]
    fn positional_and_multi_index() {
        assert_eq!(parse_pn(2, "p20=1").unwrap(), parse_pn(2, "c4=1").unwrap());
        assert_eq!(parse_pn(4, "p[2]=3").unwrap(), parse_pn(4, "c63=3").unwrap());
        assert_eq!(parse_pn(4, "p1010=1/2").unwrap().coeff(&GradedMonomial::from_pairs(&[(2, 1), (4, 1)])), crate::algebra::rat(1, 2));
        let p6 = parse_pn(6, "p[6]=2").unwrap();
        assert_eq!(p6.terms().count(), 1);
        assert!(p6.terms().all(|(_, c)| *c == int(2)));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(parse_pn(2, "c4=bad"), Err(Error::Parse("bad".into())));
        assert!(matches!(parse_pn(2, "c5=1"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_pn(2, "p[2]=1"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_pn(2, "p11=1"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_pn(2, "c4=1,c4=2"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_pn(2, "c4"), Err(Error::Parse(_))));
        assert!(parse_rational_list("1/2, 0.5").is_err());
        assert_eq!(parse_float_list("1/2, 0.25").unwrap(), vec![0.5, 0.25]);
    }

    #[test]
    fn names_follow_basis_order() {
        assert_eq!(pn_names(4), vec!["c62", "c63", "c64"]);
        assert_eq!(pn_names(5), vec!["p[1]", "p[2]", "p[3]"]);
        assert!(pn_names(1).is_empty());
    }
}
