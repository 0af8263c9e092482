//! `stable-spectral`: command-line front end for the stable-spectral library.
//!
//! Each subcommand evaluates one quantity over a grid and writes a CSV table
//! (JSON lines for `simulate`) whose `#` header echoes the resolved
//! configuration. Exit codes: 2 usage, 3 domain, 4 non-convergence,
//! 5 verification failure, 1 I/O.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod axis;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use stable_spectral::eigenfunctions::DoneyForms;
use stable_spectral::oracle::{estimate_survival, estimate_survival_extrapolated, PathConfig};
use stable_spectral::stable_model::{OneSidedSide, Rational};
use stable_spectral::wiener_hopf::{phi, resolvent_density};
use stable_spectral::*;

use axis::Axis;
use output::{emit, Cell, Table};

const THREADS_VAR: &str = "STABLE_SPECTRAL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "stable-spectral", version, about = "Spectral quantities of stable processes killed on leaving the half-line")]
struct Cli {
    /// Write the table here (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value = "1e-10")]
    tol: f64,
    /// Fixed λ truncation for the spectral integrals.
    #[arg(long, global = true)]
    lambda_max: Option<f64>,
    /// Integrate oscillating factors on the real axis only.
    #[arg(long, global = true)]
    no_rotate: bool,
    /// Subinterval cap for adaptive quadrature.
    #[arg(long, global = true, default_value_t = SpectralConfig::default().max_intervals)]
    max_intervals: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    /// αρ = 1, no positive jumps.
    Negative,
    /// αρ̂ = 1, no negative jumps.
    Positive,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// Stability index, decimal or ratio.
    #[arg(long)]
    alpha: Rational,
    /// Positivity parameter P(X_t > 0), decimal or ratio.
    #[arg(long, required_unless_present = "one_sided")]
    rho: Option<Rational>,
    /// Spectrally one-sided process; ρ follows from α.
    #[arg(long, value_enum, conflicts_with = "rho")]
    one_sided: Option<Side>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<StableParams> {
        match (self.one_sided, self.rho) {
            (Some(Side::Negative), _) => StableParams::one_sided(self.alpha.0, OneSidedSide::SpectrallyNegative),
            (Some(Side::Positive), _) => StableParams::one_sided(self.alpha.0, OneSidedSide::SpectrallyPositive),
            (None, Some(r)) => StableParams::new(self.alpha.0, r.0),
            (None, None) => unreachable!("clap requires --rho without --one-sided"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformKind {
    /// Π u(λ) = ∫ u(x) F(λx) dx.
    Pi,
    /// Π̂ u(λ) = ∫ u(x) F̂(λx) dx.
    PiHat,
    /// P_t u(x) through the spectral representation.
    Semigroup,
    /// Π Π̂ u(x), which should reproduce u(x).
    Inverse,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Double sine function S₂(z; α).
    S2 {
        #[arg(long)]
        alpha: Rational,
        /// Real parts.
        #[arg(long, allow_hyphen_values = true)]
        z: Axis,
        /// Imaginary parts.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        im: Axis,
    },
    /// Wiener–Hopf factor φ(z) = E e^{−z X̄} at an Exp(1) time.
    Phi {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: Axis,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        im: Axis,
        /// The infimum factor φ̂ instead.
        #[arg(long)]
        infimum: bool,
    },
    /// Eigenfunction F (or F̂ with --dual), its derivative and the G part.
    Eigenfn {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Axis,
        #[arg(long)]
        dual: bool,
    },
    /// Laplace transform of F in closed form, optionally against quadrature.
    Laplace {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: Axis,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        im: Axis,
        #[arg(long)]
        dual: bool,
        /// Add a quadrature column and the difference.
        #[arg(long)]
        numeric: bool,
    },
    /// Mellin transform of F in closed form, optionally against quadrature.
    Mellin {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: Axis,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        im: Axis,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        numeric: bool,
    },
    /// Survival probability P_x(T₀ > t).
    Survival {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Axis,
        #[arg(long, allow_hyphen_values = true)]
        t: Axis,
    },
    /// Transition density p_t(x, y) of the killed process.
    Density {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Axis,
        #[arg(long, allow_hyphen_values = true)]
        y: Axis,
        #[arg(long, allow_hyphen_values = true)]
        t: Axis,
    },
    /// Spectral transforms of a test function.
    Transform {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        kind: TransformKind,
        /// Test function: `power-exp` for (1+x)^{−x}, or `stretched-exp:β` for e^{−x^β}.
        #[arg(long, default_value = "power-exp")]
        u: String,
        /// Replace u(x) by u(a x).
        #[arg(long)]
        scale: Option<f64>,
        /// λ grid for pi and pi-hat.
        #[arg(long, required_if_eq_any = [("kind", "pi"), ("kind", "pi-hat")])]
        lambda: Option<Axis>,
        /// x grid for semigroup and inverse.
        #[arg(long, required_if_eq_any = [("kind", "semigroup"), ("kind", "inverse")])]
        x: Option<Axis>,
        /// Time for semigroup.
        #[arg(long, required_if_eq("kind", "semigroup"))]
        t: Option<Axis>,
    },
    /// Resolvent density r_q(x, y) of the killed process.
    Resolvent {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        q: Axis,
        #[arg(long, allow_hyphen_values = true)]
        x: Axis,
        #[arg(long, allow_hyphen_values = true)]
        y: Axis,
    },
    /// Monte Carlo survival next to the spectral value, as JSON lines.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Axis,
        #[arg(long, allow_hyphen_values = true)]
        t: Axis,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value = "1e-3")]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Grid refinement for Richardson extrapolation; 1 disables it.
        #[arg(long, default_value_t = 4)]
        refine: u64,
    },
    /// Run the identity suite; exit 5 if any check fails.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// G from the finite products of a Doney class against the integral form.
    Doney {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0.5,1,2")]
        x: Axis,
    },
}

/// What a subcommand produced.
enum Artifact {
    Csv(Table),
    JsonLines(Vec<Value>),
    /// Verification report; `ok` is false when any check failed.
    Report { table: Table, ok: bool },
}

fn config(cli: &Cli) -> Result<SpectralConfig> {
    if !(cli.tol > 0.0) || cli.lambda_max.is_some_and(|l| !(l > 0.0)) || cli.max_intervals == 0 {
        return Err(Error::Domain("--tol, --lambda-max and --max-intervals must be positive".into()));
    }
    Ok(SpectralConfig {
        tol: cli.tol,
        lambda_max: cli.lambda_max,
        rotate_oscillations: !cli.no_rotate,
        max_intervals: cli.max_intervals,
    })
}

fn base_table(name: &str, cfg: &SpectralConfig, params: Option<&StableParams>, columns: &[&'static str]) -> Table {
    let mut t = Table::new(columns);
    t.echo("stable-spectral", env!("CARGO_PKG_VERSION")).echo("command", name);
    if let Some(p) = params {
        t.echo("alpha", output::format_num(p.alpha()))
            .echo("rho", output::format_num(p.rho()))
            .echo(
                "one_sided",
                p.one_sided_mode().map_or("none".to_string(), |m| format!("{:?}", m.side)),
            );
    }
    t.echo("tol", format!("{:e}", cfg.tol))
        .echo("lambda_max", cfg.lambda_max.map_or("auto".to_string(), |l| format!("{l:e}")))
        .echo("rotate_oscillations", cfg.rotate_oscillations)
        .echo("max_intervals", cfg.max_intervals);
    t
}

/// Cartesian product of two axes, first axis outermost.
fn grid2(a: &Axis, b: &Axis) -> Vec<(f64, f64)> {
    a.values()
        .iter()
        .flat_map(|&u| b.values().iter().map(move |&v| (u, v)))
        .collect()
}

fn grid3(a: &Axis, b: &Axis, c: &Axis) -> Vec<(f64, f64, f64)> {
    grid2(a, b)
        .into_iter()
        .flat_map(|(u, v)| c.values().iter().map(move |&w| (u, v, w)))
        .collect()
}

fn complex_rows(
    z: &Axis,
    im: &Axis,
    f: impl Fn(Complex64) -> Result<Vec<Cell>> + Sync,
) -> Result<Vec<Vec<Cell>>> {
    grid2(z, im)
        .into_par_iter()
        .map(|(re, im)| {
            let mut row = vec![Cell::from(re), Cell::from(im)];
            row.extend(f(Complex64::new(re, im))?);
            Ok(row)
        })
        .collect()
}

fn parse_test_function(spec: &str, scale: Option<f64>) -> Result<TestFunction> {
    let u = match spec.split_once(':') {
        None if spec == "power-exp" => TestFunction::power_exp(),
        Some(("stretched-exp", beta)) => TestFunction::stretched_exp(stable_spectral::stable_model::parse_real(beta)?)?,
        _ => {
            return Err(Error::Domain(format!(
                "unknown test function {spec:?}; use power-exp or stretched-exp:β"
            )))
        }
    };
    match scale {
        Some(a) => u.rescale(a),
        None => Ok(u),
    }
}

fn transform_pairs(
    kind: TransformKind,
    lambda: &Option<Axis>,
    x: &Option<Axis>,
    t: &Option<Axis>,
) -> Vec<(f64, f64)> {
    // clap guarantees the grids each kind needs
    match kind {
        TransformKind::Pi | TransformKind::PiHat => lambda.as_ref().map_or(vec![], |l| l.values().iter().map(|&v| (v, 0.0)).collect()),
        TransformKind::Semigroup => match (t, x) {
            (Some(t), Some(x)) => grid2(t, x),
            _ => vec![],
        },
        TransformKind::Inverse => x.as_ref().map_or(vec![], |x| x.values().iter().map(|&v| (0.0, v)).collect()),
    }
}

fn run(cli: &Cli) -> Result<Artifact> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::S2 { alpha, z, im } => {
            let ev = S2Evaluator::new(alpha.0)?;
            let mut t = base_table("s2", &cfg, None, &["z_re", "z_im", "s2_re", "s2_im"]);
            t.echo("alpha", output::format_num(alpha.0)).echo("z", z).echo("im", im);
            for row in complex_rows(z, im, |w| {
                let s = ev.s2(w)?;
                Ok(vec![s.re.into(), s.im.into()])
            })? {
                t.push(row);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Phi { params, z, im, infimum } => {
            let p = params.resolve()?;
            let which = if *infimum { Extremum::Infimum } else { Extremum::Supremum };
            let mut t = base_table("phi", &cfg, Some(&p), &["z_re", "z_im", "phi_re", "phi_im"]);
            t.echo("extremum", format!("{which:?}")).echo("z", z).echo("im", im);
            for row in complex_rows(z, im, |w| {
                let v = phi(&p, which, w)?;
                Ok(vec![v.re.into(), v.im.into()])
            })? {
                t.push(row);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Eigenfn { params, x, dual } => {
            let p = params.resolve()?;
            let dir = if *dual { Direction::Dual } else { Direction::Primal };
            let f = EigenFn::new(&p, dir)?;
            let mut t = base_table("eigenfn", &cfg, Some(&p), &["x", "f", "f_prime", "g"]);
            t.echo("direction", format!("{dir:?}")).echo("x", x);
            for &v in x.values() {
                if !(v > 0.0) {
                    return Err(Error::Domain(format!("x = {v} must be positive")));
                }
                t.push(vec![v.into(), f.f(v).into(), f.f_prime(v).into(), f.g(v).into()]);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Laplace { params, z, im, dual, numeric } | Command::Mellin { params, z, im, dual, numeric } => {
            let is_laplace = matches!(cli.command, Command::Laplace { .. });
            let name = if is_laplace { "laplace" } else { "mellin" };
            let p = params.resolve()?;
            let dir = if *dual { Direction::Dual } else { Direction::Primal };
            let f = EigenFn::new(&p, dir)?;
            let cols: &[&'static str] = if *numeric {
                &["z_re", "z_im", "closed_re", "closed_im", "numeric_re", "numeric_im", "abs_diff"]
            } else {
                &["z_re", "z_im", "closed_re", "closed_im"]
            };
            let mut t = base_table(name, &cfg, Some(&p), cols);
            t.echo("direction", format!("{dir:?}")).echo("z", z).echo("im", im);
            let tol = cfg.tol;
            for row in complex_rows(z, im, |w| {
                let closed = if is_laplace { f.laplace(w)? } else { f.mellin(w)? };
                let mut row = vec![closed.re.into(), closed.im.into()];
                if *numeric {
                    let n = if is_laplace {
                        f.laplace_numeric(w, tol)?
                    } else {
                        f.mellin_numeric(w, tol.max(1e-9))?
                    };
                    row.extend([n.re.into(), n.im.into(), (n - closed).norm().into()]);
                }
                Ok(row)
            })? {
                t.push(row);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Survival { params, x, t: time } => {
            let p = params.resolve()?;
            let m = SpectralModel::new(&p, cfg)?;
            let mut t = base_table("survival", &cfg, Some(&p), &["x", "t", "survival"]);
            t.echo("x", x).echo("t", time);
            let vals: Vec<f64> = grid2(x, time)
                .into_par_iter()
                .map(|(x, s)| m.survival(x, s))
                .collect::<Result<_>>()?;
            for ((xv, tv), v) in grid2(x, time).into_iter().zip(vals) {
                t.push(vec![xv.into(), tv.into(), v.into()]);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Density { params, x, y, t: time } => {
            let p = params.resolve()?;
            let m = SpectralModel::new(&p, cfg)?;
            let mut t = base_table("density", &cfg, Some(&p), &["x", "y", "t", "density"]);
            t.echo("x", x).echo("y", y).echo("t", time);
            let pts = grid3(x, y, time);
            let vals: Vec<f64> = pts
                .par_iter()
                .map(|&(x, y, s)| m.transition_density(x, y, s))
                .collect::<Result<_>>()?;
            for ((xv, yv, tv), v) in pts.into_iter().zip(vals) {
                t.push(vec![xv.into(), yv.into(), tv.into(), v.into()]);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Transform { params, kind, u, scale, lambda, x, t: time } => {
            let p = params.resolve()?;
            let m = SpectralModel::new(&p, cfg)?;
            let test = parse_test_function(u, *scale)?;
            let cols: &[&'static str] = match kind {
                TransformKind::Pi | TransformKind::PiHat => &["lambda", "value"],
                TransformKind::Semigroup => &["t", "x", "value"],
                TransformKind::Inverse => &["x", "value", "u"],
            };
            let mut t = base_table("transform", &cfg, Some(&p), cols);
            t.echo("kind", format!("{kind:?}"))
                .echo("u", u)
                .echo("scale", scale.map_or("1".to_string(), |a| a.to_string()));
            for (k, a) in [("lambda", lambda), ("x", x), ("t", time)] {
                if let Some(a) = a {
                    t.echo(k, a);
                }
            }
            let pairs = transform_pairs(*kind, lambda, x, time);
            let vals: Vec<f64> = pairs
                .par_iter()
                .map(|&(a, b)| match kind {
                    TransformKind::Pi => m.pi_transform(&test, a),
                    TransformKind::PiHat => m.pi_hat_transform(&test, a),
                    TransformKind::Semigroup => m.semigroup_apply(&test, a, b),
                    TransformKind::Inverse => m.pi_pi_hat(&test, b),
                })
                .collect::<Result<_>>()?;
            for ((a, b), v) in pairs.into_iter().zip(vals) {
                t.push(match kind {
                    TransformKind::Pi | TransformKind::PiHat => vec![a.into(), v.into()],
                    TransformKind::Semigroup => vec![a.into(), b.into(), v.into()],
                    TransformKind::Inverse => vec![b.into(), v.into(), test.eval(b).into()],
                });
            }
            Ok(Artifact::Csv(t))
        }
        Command::Resolvent { params, q, x, y } => {
            let p = params.resolve()?;
            let mut t = base_table("resolvent", &cfg, Some(&p), &["q", "x", "y", "resolvent"]);
            t.echo("q", q).echo("x", x).echo("y", y);
            let pts = grid3(q, x, y);
            let vals: Vec<f64> = pts
                .par_iter()
                .map(|&(q, x, y)| resolvent_density(&p, q, x, y))
                .collect::<Result<_>>()?;
            for ((qv, xv, yv), v) in pts.into_iter().zip(vals) {
                t.push(vec![qv.into(), xv.into(), yv.into(), v.into()]);
            }
            Ok(Artifact::Csv(t))
        }
        Command::Simulate { params, x, t, paths, dt, seed, refine } => {
            let p = params.resolve()?;
            simulate(&p, cfg, x, t, *paths, *dt, *seed, *refine).map(Artifact::JsonLines)
        }
        Command::Verify { params } => {
            let p = params.resolve()?;
            let results = verify::run(&p, &cfg);
            let ok = results.iter().all(|r| r.status != verify::Status::Fail);
            let mut table = base_table("verify", &cfg, Some(&p), verify::COLUMNS);
            verify::fill(&mut table, &results);
            Ok(Artifact::Report { table, ok })
        }
        Command::Doney { params, x } => {
            let p = params.resolve()?;
            let d = DoneyForms::new(&p)?;
            let f = EigenFn::new(&p, Direction::Primal)?;
            let class = d.class();
            let mut t = base_table("doney", &cfg, Some(&p), &["x", "g_products", "g_integral", "rel_diff"]);
            t.echo("class", format!("C_{{{},{}}}", class.k, class.l)).echo("x", x);
            for &v in x.values() {
                let (a, b) = (d.g(v)?, f.g(v));
                t.push(vec![v.into(), a.into(), b.into(), ((a - b) / b).abs().into()]);
            }
            Ok(Artifact::Csv(t))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    p: &StableParams,
    cfg: SpectralConfig,
    x: &Axis,
    t: &Axis,
    paths: u64,
    dt: f64,
    seed: u64,
    refine: u64,
) -> Result<Vec<Value>> {
    let horizon = t.values().iter().copied().fold(0.0, f64::max);
    let mut paths_cfg = PathConfig::new(paths, dt, horizon, seed)?;
    if refine > 1 {
        // the fine grid is what actually gets simulated
        paths_cfg = paths_cfg.with_budget(PathConfig::DEFAULT_BUDGET / refine as f64)?;
    }
    let model = SpectralModel::new(p, cfg);
    let mut lines = vec![json!({
        "config": {
            "stable_spectral": env!("CARGO_PKG_VERSION"),
            "command": "simulate",
            "alpha": p.alpha(),
            "rho": p.rho(),
            "one_sided": p.one_sided_mode().map(|m| format!("{:?}", m.side)),
            "paths": paths,
            "dt": dt,
            "seed": seed,
            "refine": refine,
            "tol": cfg.tol,
            "x": x.to_string(),
            "t": t.to_string(),
        }
    })];
    for (xv, tv) in grid2(x, t) {
        let (mc, extra) = if refine > 1 {
            let e = estimate_survival_extrapolated(p, xv, tv, refine, &paths_cfg)?;
            let extra = json!({ "coarse": e.coarse, "fine": e.fine, "order": e.order });
            (e.extrapolated, Some(extra))
        } else {
            (estimate_survival(p, xv, tv, &paths_cfg)?, None)
        };
        let spectral = model.as_ref().map_err(Clone::clone).and_then(|m| m.survival(xv, tv));
        let mut rec = json!({
            "x": xv,
            "t": tv,
            "mc": mc,
        });
        match spectral {
            Ok(s) => {
                rec["spectral"] = json!(s);
                rec["z_score"] = json!((mc.value - s) / mc.std_error);
            }
            // the MC estimate still stands where the spectral formula does not apply
            Err(Error::Domain(why)) => {
                rec["spectral"] = Value::Null;
                rec["spectral_note"] = json!(why);
            }
            Err(e) => return Err(e),
        }
        if let Some(extra) = extra {
            rec["grids"] = extra;
        }
        lines.push(rec);
    }
    Ok(lines)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } => 4,
        Error::Domain(_)
        | Error::PoleProximity(_)
        | Error::DivisionByZero(_)
        | Error::NotIntegrable(_)
        | Error::BudgetExceeded(_) => 3,
    }
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR}={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let artifact = match run(&cli) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let (text, code) = match artifact {
        Artifact::Csv(t) => (t.render(), 0),
        Artifact::JsonLines(lines) => {
            let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
            (text, 0)
        }
        Artifact::Report { table, ok } => {
            let failed = table.rows().iter().filter(|r| r[1] == Cell::from("FAIL")).count();
            eprintln!("verify: {} checks, {failed} failed", table.rows().len());
            (table.render(), if ok { 0 } else { 5 })
        }
    };
    if let Err(e) = emit(&text, cli.output.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
