use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use heatode::algebra::{fmt_rational_pq, int, parse_rational, vn_basis, Rational, Scalar};
use heatode::dynsys::{eval_rational_h, integrate_rk4, RationalH, SystemSpec, SystemState, DEFAULT_GUARD};
use heatode::input::{multi_index_name, parse_float, parse_float_list, parse_pn, parse_rational_list, pn_names};
use heatode::jetcalc::{build_d_family, det_sn_symbolic, match_det_sn_to_family};
use heatode::phi::{build_coeff_table, build_phi, build_psi, default_c, sigma_series, three_pole_flows, three_pole_psi1};
use heatode::sl2::{act_on_h, transformed_jet, Mobius};
use heatode::verify::{matched_pn, run_suite, SuiteOptions};
use heatode::Error;

#[derive(Parser)]
#[command(name = "heatode", version, about = "ODE families and series solutions of the heat equation")]
struct Cli {
    /// Arithmetic for commands that support both.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// The equation D_(P,n+1)(h) = 0 and related data.
    #[command(subcommand)]
    Ode(OdeCommand),
    /// Series solutions as JSON.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// RK4 trajectory of the reduced system.
    Integrate(IntegrateArgs),
    /// Run a verification suite; the report is always JSON.
    Verify(VerifyArgs),
    #[command(subcommand)]
    Sl2(Sl2Command),
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    n: usize,
    /// Closing polynomial, e.g. `c4=24`, `c62=1,c64=2`, `p[3]=1/2`, `p20=1`.
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    p: String,
}

#[derive(Subcommand)]
enum OdeCommand {
    Print(FamilyArgs),
    /// Basis of V_n with the coefficient names accepted by `--p`.
    Basis {
        #[arg(long)]
        n: usize,
    },
    /// (1/b) det S_n with symbolic b, and its match against the family.
    Det {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 0)]
    delta: u8,
    /// Defaults to -2(1+2 delta).
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long = "K", default_value_t = 8)]
    k: usize,
}

#[derive(Subcommand)]
enum SeriesCommand {
    Phi(SeriesArgs),
    Table(SeriesArgs),
    Sigma {
        #[arg(long = "K", default_value_t = 6)]
        k: usize,
    },
    /// Psi for the three-pole system.
    Psi {
        #[arg(long, default_value_t = 0)]
        delta: u8,
        #[arg(long = "K", default_value_t = 8)]
        k: usize,
    },
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 0)]
    delta: u8,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    h0: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    r0: String,
    /// x2,...,x_{n+1}; missing entries are zero.
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    x0: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    t_end: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1/100")]
    step: String,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: f64,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Sl2Command {
    /// Moves a pole-sum solution h = (1/(n+1)) sum 1/(t - a_k) by gamma_1(M).
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        mobius: String,
        /// Poles a_1,...,a_(n+1).
        #[arg(long, allow_hyphen_values = true, default_value = "0,1,-1")]
        poles: String,
        /// Sample times.
        #[arg(long, allow_hyphen_values = true, default_value = "1/2,2,3")]
        t: String,
    },
}

/// Outcome of a command: output text and whether its checks passed.
struct Output {
    text: String,
    passed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, passed: true }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn parse_c(c: &Option<String>, delta: u8) -> Result<Rational, Error> {
    match c {
        Some(text) => parse_rational(text),
        None => Ok(default_c(delta)),
    }
}

fn check_delta(delta: u8) -> Result<(), Error> {
    if delta > 1 {
        return Err(Error::InvalidArgument(format!("delta must be 0 or 1, got {delta}")));
    }
    Ok(())
}

fn ode(cmd: &OdeCommand, json_out: bool) -> Result<Output, Error> {
    match cmd {
        OdeCommand::Print(f) => {
            let pn = parse_pn(f.n, &f.p)?;
            let ode = build_d_family(f.n, &pn)?;
            Ok(Output::ok(if json_out {
                pretty(&json!({"n": f.n, "P": pn.to_string(), "ode": ode.to_json(), "text": ode.to_string()}))
            } else {
                format!("{ode} = 0\n")
            }))
        }
        OdeCommand::Basis { n } => {
            let rows: Vec<(String, String, String)> = vn_basis(*n)
                .iter()
                .zip(pn_names(*n))
                .map(|(m, name)| (name, multi_index_name(*n, m), m.to_string()))
                .collect();
            Ok(Output::ok(if json_out {
                pretty(&json!({"n": n, "basis": rows.iter()
                    .map(|(name, idx, m)| json!({"name": name, "index": idx, "monomial": m}))
                    .collect::<Vec<_>>()}))
            } else if rows.is_empty() {
                format!("V_{n} is zero\n")
            } else {
                rows.iter().map(|(name, idx, m)| format!("{name}\t{idx}\t{m}\n")).collect()
            }))
        }
        OdeCommand::Det { n } => {
            let det = det_sn_symbolic(*n);
            let m = match_det_sn_to_family(*n)?;
            let v = json!({
                "n": n,
                "det": det.to_string(),
                "b": fmt_rational_pq(&m.b),
                "match": m.is_match(),
                "P": m.pn.as_ref().map(ToString::to_string),
                "residual": m.residual.to_string(),
            });
            Ok(Output::ok(if json_out {
                pretty(&v)
            } else {
                let tail = match &m.pn {
                    Some(p) => format!("matches D_(P,{}) at b = {} with P = {p}\n", n + 1, m.b),
                    None => format!("no P matches at b = {}; residual {}\n", m.b, m.residual),
                };
                format!("(1/b) det S_{n} = {det}\n{tail}")
            }))
        }
    }
}

fn series(cmd: &SeriesCommand) -> Result<Output, Error> {
    let v = match cmd {
        SeriesCommand::Phi(a) | SeriesCommand::Table(a) => {
            check_delta(a.delta)?;
            let pn = parse_pn(a.family.n, &a.family.p)?;
            let c = parse_c(&a.c, a.delta)?;
            if matches!(cmd, SeriesCommand::Phi(_)) {
                build_phi(a.family.n, &pn, &c, a.delta, a.k)?.to_json()
            } else {
                build_coeff_table(a.family.n, &pn, &c, a.delta, a.k)?.to_json()
            }
        }
        SeriesCommand::Sigma { k } => sigma_series(*k)?.to_json(),
        SeriesCommand::Psi { delta, k } => {
            check_delta(*delta)?;
            build_psi(2, &three_pole_flows(), &three_pole_psi1(), *delta, *k)?.to_json()
        }
    };
    Ok(Output::ok(pretty(&v)))
}

fn integrate(a: &IntegrateArgs, mode: Mode, json_out: bool) -> Result<Output, Error> {
    check_delta(a.delta)?;
    let n = a.family.n;
    let pn = parse_pn(n, &a.family.p)?;
    let spec = SystemSpec::reduced_with_c(n, &pn, &parse_c(&a.c, a.delta)?, a.delta)?;
    match mode {
        Mode::Exact => {
            let x = padded(parse_rational_list(&a.x0)?, n)?;
            let s0 = SystemState::new(int(0), parse_rational(&a.r0)?, parse_rational(&a.h0)?, x);
            let run = integrate_rk4(&spec, &s0, &parse_rational(&a.t_end)?, &parse_rational(&a.step)?, a.guard);
            trajectory_output(run, mode, json_out, &spec)
        }
        Mode::Float => {
            let x = padded(parse_float_list(&a.x0)?, n)?;
            let s0 = SystemState::new(0.0, parse_float(&a.r0)?, parse_float(&a.h0)?, x);
            let run = integrate_rk4(&spec, &s0, &parse_float(&a.t_end)?, &parse_float(&a.step)?, a.guard);
            trajectory_output(run, mode, json_out, &spec)
        }
    }
}

fn padded<T: Scalar>(mut x: Vec<T>, n: usize) -> Result<Vec<T>, Error> {
    if x.len() > n {
        return Err(Error::InvalidArgument(format!("{} initial x values for n = {n}", x.len())));
    }
    x.resize(n, T::zero());
    Ok(x)
}

fn trajectory_output<T: Scalar>(
    run: heatode::Result<heatode::dynsys::Trajectory<T>>,
    mode: Mode,
    json_out: bool,
    spec: &SystemSpec,
) -> Result<Output, Error> {
    match run {
        Ok(traj) => Ok(Output::ok(if json_out { pretty(&traj.to_json(mode.name())) } else { traj.to_csv() })),
        Err(Error::BlowUp { t }) => Ok(Output {
            text: pretty(&json!({"spec": spec.to_json(), "mode": mode.name(), "blow_up": {"t": t}})),
            passed: false,
        }),
        Err(e) => Err(e),
    }
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<Output, Error> {
    let opts = SuiteOptions { seed, n: a.n, max_n: a.max_n, k: a.k };
    let rep = run_suite(&a.suite, &opts)?;
    for c in &rep.checks {
        eprintln!("{} {}", if c.passed { "ok  " } else { "FAIL" }, c.name);
    }
    eprintln!("{}: {}", rep.suite, if rep.passed() { "pass" } else { "fail" });
    Ok(Output { text: pretty(&rep.to_json()), passed: rep.passed() })
}

fn sl2(cmd: &Sl2Command, json_out: bool) -> Result<Output, Error> {
    let Sl2Command::Orbit { mobius, poles, t } = cmd;
    let entries = parse_rational_list(mobius)?;
    let [a, b, c, d]: [Rational; 4] = entries
        .try_into()
        .map_err(|_| Error::InvalidArgument("--mobius takes four rationals a,b,c,d".into()))?;
    let m = Mobius::unimodular(a, b, c, d)?;
    let poles = parse_rational_list(poles)?;
    if poles.is_empty() {
        return Err(Error::InvalidArgument("at least one pole is needed".into()));
    }
    let n = poles.len() - 1;
    let rh = RationalH::new(int(n as i64 + 1), poles)?;
    let family = (n <= 4).then(|| build_d_family(n, &matched_pn(n))).transpose()?;
    let mut rows = Vec::new();
    let mut passed = true;
    for t in parse_rational_list(t)? {
        let h = |s: &Rational| Ok(eval_rational_h(&rh, s, 0)?[0].clone());
        let row = match (m.apply(&t), act_on_h(&m, &h, &t)) {
            (Ok(tau), Ok(h_hat)) => {
                let residual = match &family {
                    Some(f) => {
                        let jet = eval_rational_h(&rh, &tau, n + 1)?;
                        let r = f.eval(&transformed_jet(&m, &jet, &t, n + 1)?)?;
                        passed &= r == int(0);
                        Some(fmt_rational_pq(&r))
                    }
                    None => None,
                };
                json!({"t": fmt_rational_pq(&t), "tau": fmt_rational_pq(&tau), "h_hat": fmt_rational_pq(&h_hat), "residual": residual})
            }
            (_, Err(e)) | (Err(e), _) => json!({"t": fmt_rational_pq(&t), "error": e.to_string()}),
        };
        rows.push(row);
    }
    let v = json!({
        "mobius": ([&m.a, &m.b, &m.c, &m.d].map(fmt_rational_pq)),
        "n": n,
        "ode": family.as_ref().map(ToString::to_string),
        "rows": rows,
    });
    let text = if json_out {
        pretty(&v)
    } else {
        let mut s = String::from("t\ttau\th_hat\tresidual\n");
        for r in &rows {
            let field = |k: &str| r.get(k).and_then(Value::as_str).unwrap_or("-").to_string();
            if let Some(e) = r.get("error").and_then(Value::as_str) {
                s.push_str(&format!("{}\t{e}\n", field("t")));
            } else {
                s.push_str(&format!("{}\t{}\t{}\t{}\n", field("t"), field("tau"), field("h_hat"), field("residual")));
            }
        }
        s
    };
    Ok(Output { text, passed })
}

fn run(cli: &Cli) -> Result<Output, Error> {
    match &cli.command {
        Command::Ode(cmd) => ode(cmd, cli.json),
        Command::Series(cmd) => series(cmd),
        Command::Integrate(a) => integrate(a, cli.mode, cli.json),
        Command::Verify(a) => verify(a, cli.seed),
        Command::Sl2(cmd) => sl2(cmd, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &out.text).map_err(|e| e.to_string()),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
