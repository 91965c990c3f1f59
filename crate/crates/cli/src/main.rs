use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use waring_core::binary::{
    border_rank_binary, decompose_binary, decompose_binary_avoiding, generic_rank_in_subspace,
    open_rank_binary, rank_binary, subspace_rank_bound,
};
use waring_core::certify::{rank_bracket, verify_with, Bound, Certificate, VerifyOptions};
use waring_core::form::parse_form;
use waring_core::ternary::{
    bound_b1, decompose_ternary, decompose_ternary_odd, odd_degree_bound, quartic_brk3_decompose,
    quartic_decompose_open, quartic_size_bound, witness_avoidance, witness_quartic,
};
use waring_core::{AvoidanceSet, Decomposition, Error, Form, Rational};

const EXIT_USAGE: u8 = 1;
const EXIT_RETRY: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(
    name = "waring",
    version,
    about = "Waring decompositions of binary and ternary forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// Form such as "x0^3*x1 + 2*x1^4", or "-" to read standard input
    #[arg(allow_hyphen_values = true)]
    form: Option<String>,
    /// Read the form from a file
    #[arg(short = 'f', long = "file", conflicts_with = "form")]
    file: Option<PathBuf>,
    /// Number of variables (inferred from the highest index otherwise)
    #[arg(long)]
    vars: Option<usize>,
}

#[derive(Args, Clone)]
struct Opts {
    /// Seed for every random choice
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance for verification
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// File of avoidance generators, one form per line
    #[arg(long)]
    avoid: Option<PathBuf>,
    /// On retry exhaustion, try this many further seeds
    #[arg(long, default_value_t = 0)]
    retries: u64,
    /// Emit JSON (the default)
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit a short human-readable summary
    #[arg(long)]
    text: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Waring rank of a binary form
    Rank(Input),
    /// Border rank of a binary form
    BorderRank(Input),
    /// Open rank d + 2 - b of a binary form
    OpenRank(Input),
    /// Rank bracket of a form in at most three variables
    Bracket {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: Opts,
    },
    /// Decompose a binary or ternary form
    Decompose {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: Opts,
    },
    /// Decompose with every point outside the --avoid set
    DecomposeAvoid {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: Opts,
    },
    /// Plane quartic with at most eight points off the --avoid set
    Quartic8 {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: Opts,
    },
    /// Plane quartic of catalecticant rank three with seven points
    Brk3 {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: Opts,
    },
    /// The quartic that needs eight points off its tangent line
    Witness {
        #[arg(long)]
        text: bool,
    },
    /// Closed-form open-rank bound in n variables and degree d
    Bound { n: usize, d: usize },
    /// Replay a certificate from a file or "-"
    Verify { certificate: String },
    /// Largest rank seen at random points of random k-planes of binary forms
    CrnSample {
        d: usize,
        k: usize,
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<String, Failure>;

fn read_source(source: &str) -> Result<String, Failure> {
    if source == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(source)
            .map_err(|e| Failure::Usage(format!("reading {source}: {e}")))
    }
}

fn infer_vars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut max = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(k) = text[start..j].parse::<usize>() {
                max = Some(max.map_or(k, |m: usize| m.max(k)));
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    max.map_or(1, |m| m + 1)
}

impl Input {
    fn load(&self, min_vars: usize) -> Result<Form<Rational>, Failure> {
        let text = match (&self.form, &self.file) {
            (_, Some(path)) => read_source(&path.to_string_lossy())?,
            (Some(s), None) if s == "-" => read_source("-")?,
            (Some(s), None) => s.clone(),
            (None, None) => return Err(Failure::Usage("no form given".into())),
        };
        let text = text.trim();
        let n = self.vars.unwrap_or_else(|| infer_vars(text).max(min_vars));
        parse_form(text, n).map_err(|e| Failure::Usage(e.to_string()))
    }
}

impl Opts {
    fn avoidance(&self, n: usize) -> Result<AvoidanceSet, Failure> {
        match &self.avoid {
            None => Ok(AvoidanceSet::empty(n)),
            Some(path) => {
                let text = read_source(&path.to_string_lossy())?;
                Ok(AvoidanceSet::parse(&text, n)?)
            }
        }
    }

    /// Runs `op` with the seed and, on retry exhaustion, with further seeds.
    fn seeded<T>(
        &self,
        mut op: impl FnMut(u64) -> waring_core::Result<T>,
    ) -> waring_core::Result<T> {
        let mut seed = self.seed;
        loop {
            match op(seed) {
                Err(Error::RetryExhausted { .. }) if seed < self.seed + self.retries => seed += 1,
                other => return other,
            }
        }
    }

    fn certify(
        &self,
        f: &Form<Rational>,
        dec: &Decomposition,
        avoid: Option<&AvoidanceSet>,
        bound: Option<Bound>,
    ) -> Outcome {
        let cert = verify_with(
            f,
            dec,
            &VerifyOptions {
                tol: self.tol,
                avoid,
                bound,
            },
        )?;
        let out = if self.text {
            summary(&cert)
        } else {
            cert.to_json()
        };
        if cert.valid {
            Ok(out)
        } else {
            emit(&out);
            Err(Failure::Invalid(failed_checks(&cert)))
        }
    }
}

fn summary(cert: &Certificate) -> String {
    let mut s = format!(
        "{} terms, residual {:.3e}, {}\n",
        cert.terms.len(),
        cert.residual,
        if cert.valid { "VALID" } else { "INVALID" }
    );
    for t in &cert.terms {
        let point: Vec<String> = t.point.iter().map(|c| format!("{c:.6}")).collect();
        s.push_str(&format!(
            "  {:.6} * ({})^{}\n",
            t.coeff,
            point.join(", "),
            cert.d
        ));
    }
    for c in &cert.checks {
        s.push_str(&format!(
            "  {}: {} ({})\n",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.detail
        ));
    }
    s.trim_end().to_string()
}

fn failed_checks(cert: &Certificate) -> String {
    let failed: Vec<String> = cert
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    format!("certificate INVALID ({})", failed.join("; "))
}

fn binary_bound(f: &Form<Rational>) -> Result<Bound, Failure> {
    let b = border_rank_binary(f)?;
    let d = f.degree();
    Ok(Bound::new(b.max(d + 2 - b), "binary rank is b or d+2-b"))
}

fn decompose(input: &Input, opts: &Opts) -> Outcome {
    let f = input.load(1)?;
    let d = f.degree();
    match f.num_vars() {
        2 => {
            let dec = opts.seeded(|s| decompose_binary(&f, s))?;
            opts.certify(&f, &dec, None, Some(binary_bound(&f)?))
        }
        3 if d == 4 => {
            let x = AvoidanceSet::empty(3);
            let dec = opts.seeded(|s| quartic_decompose_open(&f, &x, s))?;
            opts.certify(&f, &dec, None, Some(quartic_size_bound(&f, dec.len())))
        }
        3 if d >= 5 && d % 2 == 1 => {
            let dec = opts.seeded(|s| decompose_ternary_odd(&f, s))?;
            let bound = Bound::new(odd_degree_bound(d), "ternary odd degree (d^2-1)/2");
            opts.certify(&f, &dec, None, Some(bound))
        }
        3 => {
            let dec = opts.seeded(|s| decompose_ternary(&f, s))?;
            opts.certify(&f, &dec, None, None)
        }
        _ => {
            let b = rank_bracket(&f, opts.seed)?;
            opts.certify(&f, &b.witness, None, None)
        }
    }
}

fn decompose_avoid(input: &Input, opts: &Opts) -> Outcome {
    let f = input.load(2)?;
    let x = opts.avoidance(f.num_vars())?;
    match (f.num_vars(), f.degree()) {
        (2, d) => {
            let dec = opts.seeded(|s| decompose_binary_avoiding(&f, &x, s))?;
            let b = border_rank_binary(&f)?;
            let bound = Bound::new(d + 2 - b, "binary open rank d+2-b");
            opts.certify(&f, &dec, Some(&x), Some(bound))
        }
        (3, 4) => quartic(&f, &x, opts),
        (n, d) => Err(Failure::Lib(Error::Unsupported(format!(
            "avoiding decompositions for n = {n}, d = {d}"
        )))),
    }
}

fn quartic(f: &Form<Rational>, x: &AvoidanceSet, opts: &Opts) -> Outcome {
    let dec = opts.seeded(|s| quartic_decompose_open(f, x, s))?;
    opts.certify(f, &dec, Some(x), Some(quartic_size_bound(f, dec.len())))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Rank(input) => Ok(rank_binary(&input.load(2)?)?.to_string()),
        Command::BorderRank(input) => Ok(border_rank_binary(&input.load(2)?)?.to_string()),
        Command::OpenRank(input) => Ok(open_rank_binary(&input.load(2)?)?.to_string()),
        Command::Bracket { input, opts } => {
            let f = input.load(1)?;
            let b = rank_bracket(&f, opts.seed)?;
            if opts.text {
                Ok(format!("{} <= rank <= {}", b.lower, b.upper))
            } else {
                let cert = verify_with(
                    &f,
                    &b.witness,
                    &VerifyOptions {
                        tol: opts.tol,
                        ..Default::default()
                    },
                )?;
                let body = json!({ "lower": b.lower, "upper": b.upper, "witness": cert });
                Ok(serde_json::to_string_pretty(&body).expect("serializable"))
            }
        }
        Command::Decompose { input, opts } => decompose(&input, &opts),
        Command::DecomposeAvoid { input, opts } => decompose_avoid(&input, &opts),
        Command::Quartic8 { input, opts } => {
            let f = input.load(3)?;
            let x = opts.avoidance(3)?;
            quartic(&f, &x, &opts)
        }
        Command::Brk3 { input, opts } => {
            let f = input.load(3)?;
            let x = opts.avoidance(3)?;
            let dec = opts.seeded(|s| quartic_brk3_decompose(&f, &x, s))?;
            let bound = Bound::new(7, "border rank 3 plane quartic: seven points");
            opts.certify(&f, &dec, Some(&x), Some(bound))
        }
        Command::Witness { text } => {
            let f = witness_quartic();
            if text {
                return Ok(f.to_string());
            }
            let gens: Vec<String> = witness_avoidance()
                .generators()
                .iter()
                .map(|g| g.to_string())
                .collect();
            let body = json!({ "form": f.to_string(), "avoid": gens });
            Ok(serde_json::to_string_pretty(&body).expect("serializable"))
        }
        Command::Bound { n, d } => Ok(bound_b1(n, d)?.to_string()),
        Command::Verify { certificate } => {
            let cert = Certificate::from_json(&read_source(&certificate)?)?;
            let again = cert.replay()?;
            if again.valid {
                Ok(again.to_json())
            } else {
                emit(&again.to_json());
                Err(Failure::Invalid(failed_checks(&again)))
            }
        }
        Command::CrnSample { d, k, trials, seed } => {
            let max = generic_rank_in_subspace(d, k, trials, seed)?;
            let bound = subspace_rank_bound(d, k);
            let body = json!({ "d": d, "k": k, "trials": trials, "max_rank": max, "bound": bound, "within_bound": max <= bound });
            Ok(serde_json::to_string_pretty(&body).expect("serializable"))
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(out: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{out}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse { .. } => EXIT_USAGE,
                Error::RetryExhausted { .. } | Error::RootFinding(_) | Error::NoSmoothConic => {
                    EXIT_RETRY
                }
                _ => EXIT_PRECONDITION,
            };
            ExitCode::from(code)
        }
    }
}
