use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use sepdetect::bloch::{decompose, GeneratorSet};
use sepdetect::parse::{self, StateSpec};
use sepdetect::scan::{self, format_sig, Direction};
use sepdetect::{selftest, DensityMatrix, Error, Result};

const AFTER_HELP: &str = "\
STATE SPECS
  isotropic:d1=2,d2=3,p=0.4      generalised isotropic state (2 <= d1 <= d2)
  horodecki:x=0.9,q=0.99         q*rho_PH(x) + (1-q) I/9, q defaults to 1
  bound2x4:d=0.9,x=0.3           x|xi><xi| + (1-x) rho_bound(d), x defaults to 0
  ex2:p=0.7                      p|psi+><psi+| + (1-p)|00><00|
  ex4:a1=0.1,a2=0.3,a3=0.2       two-qubit X state (must be positive)
  mixed:M=2,N=3                  maximally mixed state
  random:M=3,N=3,rank=9,seed=42  random state, rank defaults to M*N
  separable:M=2,N=3,terms=4,seed=1  random convex mixture of product states
  file:<path>                    plain-text matrix, needs --dims M,N
The seed of random/separable defaults to $SEPDETECT_SEED, else 0.

CRITERION SPECS
  devicente | enhanced | ppt | realignment
  shen:m=1,a=A,b=B               (m defaults to 1)
  theorem1:alpha=[..],beta=[..]
  corollary2:a=A,b=B
  theorem2:a=A                   (b fixed by |b| = |a| sqrt(N(N-1)/(M(M-1))))
  theorem3:a=A,b=B,alpha=[..],beta=[..]

EXIT CODES
  detect: 0 entangled, 1 inconclusive, 2 error. Others: 0 ok, 2 error.
  selftest: 0 if every check passes, 1 otherwise.";

#[derive(Parser)]
#[command(name = "sepdetect", version, about = "Bloch-representation entanglement criteria", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one criterion on one state.
    Detect {
        #[arg(long)]
        state: String,
        #[arg(long)]
        criterion: String,
        /// Subsystem dimensions M,N (for file: states).
        #[arg(long)]
        dims: Option<String>,
        /// Print a JSON object {lhs, bound, violation, entangled}.
        #[arg(long)]
        json: bool,
    },
    /// Sweep a state family on a uniform grid and print CSV.
    Scan {
        /// State spec with the scanned parameter left out.
        #[arg(long)]
        family: String,
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        criterion: String,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bisect for the parameter value where detection switches on.
    Threshold {
        #[arg(long)]
        family: String,
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        criterion: String,
        #[arg(long, default_value_t = scan::DEFAULT_TOL)]
        tol: f64,
    },
    /// Print the Bloch vectors r, s and correlation matrix T.
    Decompose {
        #[arg(long)]
        state: String,
        #[arg(long)]
        dims: Option<String>,
    },
    /// Print the SU(d) generators in canonical order.
    Generators {
        #[arg(long)]
        d: usize,
    },
    /// Recompute the reference thresholds and identities.
    Selftest,
}

#[derive(Serialize)]
struct VerdictJson {
    lhs: f64,
    bound: f64,
    violation: f64,
    entangled: bool,
}

fn load_state(spec: &str, dims: Option<&str>) -> Result<DensityMatrix> {
    let dims = dims.map(parse::parse_dims).transpose()?;
    parse::resolve_state(spec, dims)
}

fn fmt_vec(v: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = v.map(format_sig).collect();
    format!("[{}]", parts.join(", "))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Detect {
            state,
            criterion,
            dims,
            json,
        } => {
            let rho = load_state(&state, dims.as_deref())?;
            let crit = parse::parse_criterion(&criterion)?;
            let v = crit.evaluate(&rho)?;
            if json {
                let obj = VerdictJson {
                    lhs: v.lhs,
                    bound: v.bound,
                    violation: v.violation,
                    entangled: v.is_entangled(),
                };
                writeln!(out, "{}", serde_json::to_string(&obj).expect("verdict serialises"))?;
            } else {
                writeln!(out, "criterion: {crit}")?;
                writeln!(out, "lhs:       {}", format_sig(v.lhs))?;
                writeln!(out, "bound:     {}", format_sig(v.bound))?;
                writeln!(out, "violation: {}", format_sig(v.violation))?;
                writeln!(out, "decision:  {:?}", v.decision)?;
            }
            Ok(if v.is_entangled() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Scan {
            family,
            param,
            from,
            to,
            steps,
            criterion,
            output,
        } => {
            let fam = StateSpec::parse(&family)?.family(&param)?;
            let crit = parse::parse_criterion(&criterion)?;
            let res = scan::sweep(&fam, &crit, from, to, steps)?;
            match output {
                Some(path) => res.write_csv(File::create(path)?)?,
                None => res.write_csv(&mut out)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Threshold {
            family,
            param,
            from,
            to,
            criterion,
            tol,
        } => {
            let fam = StateSpec::parse(&family)?.family(&param)?;
            let crit = parse::parse_criterion(&criterion)?;
            let th = scan::threshold(&fam, &crit, from, to, tol)?;
            let side = match th.direction {
                Direction::DetectsAbove => "above",
                Direction::DetectsBelow => "below",
            };
            writeln!(
                out,
                "{param} = {:.9} +/- {:.1e} (entangled {side})",
                th.value, th.tolerance
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose { state, dims } => {
            let rho = load_state(&state, dims.as_deref())?;
            let b = decompose(&rho)?;
            let (m, n) = rho.dims();
            let gm = GeneratorSet::cached(m)?;
            let gn = GeneratorSet::cached(n)?;
            let labels = |g: &GeneratorSet| (0..g.len()).map(|i| g.label(i)).collect::<Vec<_>>().join(" ");
            writeln!(out, "# dims {m}x{n}")?;
            writeln!(out, "# generator order: diagonal w_l, then u_jk (j<k), then v_jk (j<k)")?;
            writeln!(out, "# first factor:  {}", labels(&gm))?;
            writeln!(out, "# second factor: {}", labels(&gn))?;
            writeln!(out, "r = {}", fmt_vec(b.r().iter().copied()))?;
            writeln!(out, "s = {}", fmt_vec(b.s().iter().copied()))?;
            writeln!(out, "T =")?;
            for row in b.t().row_iter() {
                writeln!(out, "  {}", fmt_vec(row.iter().copied()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Generators { d } => {
            let g = GeneratorSet::new(d)?;
            for (idx, mat) in g.iter().enumerate() {
                writeln!(out, "{}", g.label(idx))?;
                for i in 0..d {
                    let row: Vec<String> = (0..d)
                        .map(|j| {
                            let z = mat[(i, j)];
                            match (z.re == 0.0, z.im == 0.0) {
                                (_, true) => format_sig(z.re),
                                (true, false) => format!("{}i", format_sig(z.im)),
                                (false, false) => format!("{}{:+}i", format_sig(z.re), z.im),
                            }
                        })
                        .collect();
                    writeln!(out, "  {}", row.join(" "))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let mut all = true;
            for outcome in selftest::run_all() {
                writeln!(out, "{outcome}")?;
                all &= outcome.passed;
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Parse(_)) {
                eprintln!("run `sepdetect --help` for the state and criterion syntax");
            }
            ExitCode::from(2)
        }
    }
}
