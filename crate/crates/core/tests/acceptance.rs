//! Acceptance criteria. One line per criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use heatode::algebra::{int, partition_count, rat, Rational};
use heatode::jetcalc::{build_dn, det_sn, match_det_sn_to_family, JetMonomial, JetPoly};
use heatode::verify::{matched_pn, run_suite, SuiteOptions, SuiteReport};

struct Outcome {
    passed: bool,
    note: String,
}

fn suite(name: &str, opts: &SuiteOptions, filter: &dyn Fn(&str) -> bool) -> Outcome {
    match run_suite(name, opts) {
        Ok(rep) => summarize(&rep, filter),
        Err(e) => Outcome { passed: false, note: format!("{name}: {e}") },
    }
}

fn summarize(rep: &SuiteReport, filter: &dyn Fn(&str) -> bool) -> Outcome {
    let picked: Vec<_> = rep.checks.iter().filter(|c| filter(&c.name)).collect();
    let failed: Vec<_> = picked.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    Outcome {
        passed: !picked.is_empty() && failed.is_empty(),
        note: if failed.is_empty() {
            format!("{} checks", picked.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
    }
}

fn all(_: &str) -> bool {
    true
}

fn jet(pairs: &[(usize, u32)]) -> JetMonomial {
    JetMonomial::from_pairs(pairs)
}

/// Printed expansion of `(1/b) det S_n` as `(coefficient, power of b, monomial)`.
fn printed_det(n: usize) -> Vec<(i64, u32, JetMonomial)> {
    match n {
        0 => vec![(1, 0, jet(&[(1, 1)])), (1, 1, jet(&[(0, 2)]))],
        2 => vec![
            (1, 0, jet(&[(3, 1)])),
            (4, 1, jet(&[(0, 1), (2, 1)])),
            (3, 1, jet(&[(1, 2)])),
            (6, 2, jet(&[(0, 2), (1, 1)])),
            (1, 3, jet(&[(0, 4)])),
        ],
        3 => vec![
            (1, 0, jet(&[(4, 1)])),
            (5, 1, jet(&[(0, 1), (3, 1)])),
            (10, 1, jet(&[(1, 1), (2, 1)])),
            (10, 2, jet(&[(0, 2), (2, 1)])),
            (15, 2, jet(&[(0, 1), (1, 2)])),
            (10, 3, jet(&[(0, 3), (1, 1)])),
            (1, 4, jet(&[(0, 5)])),
        ],
        // expanded from the factored display
        4 => vec![
            (1, 0, jet(&[(5, 1)])),
            (6, 1, jet(&[(0, 1), (4, 1)])),
            (15, 1, jet(&[(1, 1), (3, 1)])),
            (15, 2, jet(&[(0, 2), (3, 1)])),
            (10, 1, jet(&[(2, 2)])),
            (60, 2, jet(&[(0, 1), (1, 1), (2, 1)])),
            (20, 3, jet(&[(0, 3), (2, 1)])),
            (15, 2, jet(&[(1, 3)])),
            (45, 3, jet(&[(0, 2), (1, 2)])),
            (15, 4, jet(&[(0, 4), (1, 1)])),
            (1, 5, jet(&[(0, 6)])),
        ],
        _ => unreachable!(),
    }
}

fn printed_at(n: usize, b: &Rational) -> JetPoly {
    printed_det(n).into_iter().fold(JetPoly::zero(), |acc, (c, e, m)| {
        acc.add(&JetPoly::term(int(c) * b.pow(e as i32), m))
    })
}

fn c1_operator() -> Outcome {
    let mut bad = Vec::new();
    for n in 2..=8usize {
        let d = build_dn(n);
        let head = d.coeff(&jet(&[(n, 1)]));
        let mid = d.coeff(&jet(&[(0, 1), (n - 1, 1)]));
        let tail = d.coeff(&jet(&[(0, n as u32 + 1)]));
        let fact: i64 = (1..=n as i64).product();
        if (head, mid, tail) != (int(1), int((n * (n + 1)) as i64), int((1 << (n - 1)) * fact)) {
            bad.push(n);
        }
    }
    Outcome { passed: bad.is_empty(), note: format!("n = 2..8, mismatches {bad:?}") }
}

fn c2_dims() -> Outcome {
    let mut ok = true;
    for n in 0..=12 {
        let d = heatode::algebra::dim_vn(n);
        ok &= d == heatode::algebra::vn_basis(n).len()
            && d as i128 == partition_count(n + 2) as i128 - partition_count(n + 1) as i128 - 1;
    }
    let small: Vec<usize> = (0..=4).map(heatode::algebra::dim_vn).collect();
    ok &= small == [0, 0, 1, 1, 3];
    Outcome { passed: ok, note: format!("dims 0..4 = {small:?}") }
}

fn c3_det_displays() -> Outcome {
    // degree in b is at most n + 1, so agreement at 8 points is symbolic equality
    let bs: Vec<Rational> = [1, 2, 3, -1, 5, 7, -4, 11].iter().map(|&k| rat(k, 3)).collect();
    let mut bad = Vec::new();
    for n in [0usize, 2, 3, 4] {
        if !bs.iter().all(|b| det_sn(n, b) == printed_at(n, b)) {
            bad.push(n);
        }
    }
    Outcome { passed: bad.is_empty(), note: format!("n = 0, 2, 3, 4; mismatches {bad:?}") }
}

fn c4_detmatch() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 2..=6usize {
        match match_det_sn_to_family(n) {
            Ok(m) => {
                if n <= 4 {
                    ok &= m.b == int(n as i64 + 1) && m.pn.as_ref() == Some(&matched_pn(n));
                }
                notes.push(format!(
                    "n={n}: b={} {}",
                    m.b,
                    if m.is_match() { "match" } else { "residual" }
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("n={n}: {e}"));
            }
        }
    }
    Outcome { passed: ok, note: notes.join(", ") }
}

fn c6_chazy(opts: &SuiteOptions) -> Outcome {
    suite("chazy", opts, &|name| name != "c4 = 24 display" && name != "k^2 at c4 = 240")
}

fn c7_ladder(opts: &SuiteOptions) -> Outcome {
    suite("ladder", opts, &|name| !name.starts_with("head"))
}

fn c9_sigma(opts: &SuiteOptions) -> Outcome {
    let o = SuiteOptions { k: Some(6), ..opts.clone() };
    suite("sigma", &o, &|name| name.starts_with("Phi("))
}

fn c10_symbolic(opts: &SuiteOptions) -> Outcome {
    let o = SuiteOptions { k: Some(8), ..opts.clone() };
    suite("heat", &o, &|name| name.starts_with("symbolic") || name.starts_with("fault"))
}

fn c11_numeric(opts: &SuiteOptions) -> Outcome {
    suite("heat", opts, &|name| name.starts_with("numeric") || name.starts_with("halving"))
}

fn c13_hermite(opts: &SuiteOptions) -> Outcome {
    let o = SuiteOptions { k: Some(10), ..opts.clone() };
    suite("hermite", &o, &|name| name.contains("He_k"))
}

fn c14_conservation(opts: &SuiteOptions) -> Outcome {
    suite("hermite", opts, &|name| name.contains("I(t)"))
}

fn c15_addendum(opts: &SuiteOptions) -> Outcome {
    let o = SuiteOptions { k: Some(8), ..opts.clone() };
    suite("addendum", &o, &|name| !name.starts_with("Psi recursion"))
}

fn main() -> ExitCode {
    let opts = SuiteOptions { seed: 20_240_601, ..SuiteOptions::default() };
    type Criterion<'a> = (u32, &'a str, Duration, Box<dyn Fn() -> Outcome + 'a>);
    let o = &opts;
    let criteria: Vec<Criterion> = vec![
        (1, "D_n head, h*h^(n-1) and h^(n+1) coefficients", Duration::from_secs(1), Box::new(c1_operator)),
        (2, "dim V_n = p(n+2) - p(n+1) - 1", Duration::from_secs(1), Box::new(c2_dims)),
        (3, "det S_n displays with symbolic b", Duration::from_secs(1), Box::new(c3_det_displays)),
        (4, "det S_n matching constants", Duration::from_secs(10), Box::new(c4_detmatch)),
        (5, "pole-sum rational solutions", Duration::from_secs(10), Box::new(|| suite("rational", &SuiteOptions { max_n: Some(6), ..o.clone() }, &|n| n.starts_with("det")))),
        (6, "Chazy identifications", Duration::from_secs(10), Box::new(|| c6_chazy(o))),
        (7, "ladder and factorization identities", Duration::from_secs(30), Box::new(|| c7_ladder(o))),
        (8, "Phi recursion against the coefficient table", Duration::from_secs(30), Box::new(|| suite("phi-equiv", &SuiteOptions { k: Some(12), max_n: Some(4), ..o.clone() }, &all))),
        (9, "sigma bridge through z^13", Duration::from_secs(10), Box::new(|| c9_sigma(o))),
        (10, "symbolic heat residual and fault detection", Duration::from_secs(60), Box::new(|| c10_symbolic(o))),
        (11, "numeric heat residual on a trajectory", Duration::from_secs(10), Box::new(|| c11_numeric(o))),
        (12, "SL(2) action", Duration::from_secs(30), Box::new(|| suite("sl2", o, &all))),
        (13, "Hermite solutions, k <= 10", Duration::from_secs(10), Box::new(|| c13_hermite(o))),
        (14, "conservation of the integral", Duration::from_secs(10), Box::new(|| c14_conservation(o))),
        (15, "three-pole addendum", Duration::from_secs(30), Box::new(|| c15_addendum(o))),
        (16, "RK4 convergence order", Duration::from_secs(10), Box::new(|| suite("rk4", o, &|n| n.starts_with("RK4")))),
    ];
    let mut failures = 0;
    for (id, title, budget, run) in &criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let passed = out.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] {id:>2}. {title} ({:.2}s{}) {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { String::new() } else { format!(" > {}s", budget.as_secs()) },
            out.note
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

