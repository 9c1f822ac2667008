//! Command-line front end.
//!
//! Exit codes: 0 verdict true or checks passed, 1 verdict false or checks
//! failed, 2 internal error, 64 usage error, 65 unreadable data.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqdisc::multipartite::check_copies_psk;
use seqdisc::numerics::C64;
use seqdisc::optimality::{check_global_optimality, global_optimum, report_for_pair, OptimalityReport};
use seqdisc::povm::json::{parse_document, to_precise_json, Meta, PovmDocument};
use seqdisc::povm::{
    build_sequential, dual_certificate, flatten, joint_states, sample_outcomes, verify_povm, verify_unambiguous,
    CertificateReport, PovmResiduals, EQUAL_PRIORS,
};
use seqdisc::states::{lifted_trine_overlap, ppm_overlap, prepare_pair, psk_overlap};
use seqdisc::{Error, Overlap};
use serde::Serialize;

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "seqdisc",
    version,
    about = "Globally optimal sequential unambiguous measurements for symmetric ternary states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a one-way measurement reaches the joint optimum.
    Check(OverlapArgs),
    /// Build the optimal sequential measurement and write it as JSON.
    Construct {
        #[command(flatten)]
        input: OverlapArgs,
        /// Output file; `-` for standard output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a POVM file: completeness, positivity, unambiguity, optimality.
    Verify {
        path: PathBuf,
        /// Overrides the overlaps stored in the file.
        #[command(flatten)]
        input: OverlapArgs,
    },
    /// Grid scans written as CSV.
    Scan(ScanArgs),
    /// Success-probability curves written as CSV.
    Curve(CurveArgs),
    /// Sample measurement outcomes for one of the three joint states.
    Simulate {
        path: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..3))]
        state: u8,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides the overlaps stored in the file.
        #[command(flatten)]
        input: OverlapArgs,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct OverlapArgs {
    /// Alice's overlap `⟨a_0|a_1⟩`.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true)]
    pub ka: Option<Vec<f64>>,
    /// Bob's overlap `⟨b_0|b_1⟩`.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true)]
    pub kb: Option<Vec<f64>>,
    /// PSK coherent states with mean photon numbers for Alice and Bob.
    #[arg(long, num_args = 2, value_names = ["SA", "SB"], allow_hyphen_values = true)]
    pub psk: Option<Vec<f64>>,
    /// Lifted trine states with lift parameter g on both sides.
    #[arg(long, value_name = "G", allow_hyphen_values = true)]
    pub trine: Option<f64>,
    /// PPM coherent states built from real amplitudes α and β for Bob;
    /// Alice uses `--ka` if given, else the same triple.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], allow_hyphen_values = true)]
    pub ppm: Option<Vec<f64>>,
}

impl OverlapArgs {
    fn is_empty(&self) -> bool {
        self.ka.is_none() && self.kb.is_none() && self.psk.is_none() && self.trine.is_none() && self.ppm.is_none()
    }

    fn resolve(&self) -> Result<(Overlap, Overlap), CliError> {
        let modes = [
            self.kb.is_some(),
            self.psk.is_some(),
            self.trine.is_some(),
            self.ppm.is_some(),
        ];
        if modes.iter().filter(|m| **m).count() != 1 {
            return Err(CliError::usage("give exactly one of --ka/--kb, --psk, --trine, --ppm"));
        }
        let pair = |v: &[f64]| Overlap::from_parts(v[0], v[1]);
        let result = if let Some(kb) = &self.kb {
            let ka = self.ka.as_ref().ok_or_else(|| CliError::usage("--kb needs --ka"))?;
            pair(ka).and_then(|ka| Ok((ka, pair(kb)?)))
        } else if self.ka.is_some() && self.ppm.is_none() {
            return Err(CliError::usage("--ka needs --kb or --ppm"));
        } else if let Some(s) = &self.psk {
            psk_overlap(s[0]).and_then(|a| Ok((a, psk_overlap(s[1])?)))
        } else if let Some(g) = self.trine {
            lifted_trine_overlap(g).map(|k| (k, k))
        } else {
            let p = self.ppm.as_ref().expect("one mode is set");
            ppm_overlap(C64::new(p[0], 0.0), C64::new(p[1], 0.0))
                .and_then(|kb| Ok((self.ka.as_deref().map(pair).transpose()?.unwrap_or(kb), kb)))
        };
        result.map_err(|e| CliError::usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(value_enum)]
    pub mode: ScanMode,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    /// First-axis range: Re K, S_A, or S_total.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_hyphen_values = true)]
    pub x_range: Option<Vec<f64>>,
    /// Second-axis range: Im K, S_B, or the number of copies N.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_hyphen_values = true)]
    pub y_range: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// `K_A = K_B = K` over the complex plane.
    ComplexK,
    /// PSK photon numbers `(S_A, S_B)`.
    PskGrid,
    /// `N` PSK copies sharing `S_total`.
    Copies,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(value_enum)]
    pub mode: CurveMode,
    #[arg(long, default_value_t = 3.0)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveMode {
    /// `K_A = K_B = psk(S)`.
    PskGlobal,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    fn data(message: impl Into<String>) -> Self {
        Self::new(EXIT_DATA, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(EXIT_INTERNAL, e.to_string())
    }
}

/// Result of a command: exit code plus text for standard output.
struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_TRUE
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(o) => {
            if out.write_all(o.stdout.as_bytes()).is_err() {
                return EXIT_INTERNAL;
            }
            let _ = err.write_all(o.stderr.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Check(input) => cmd_check(&input),
        Command::Construct { input, out } => cmd_construct(&input, &out),
        Command::Verify { path, input } => cmd_verify(&path, &input),
        Command::Scan(args) => cmd_scan(&args),
        Command::Curve(args) => cmd_curve(&args),
        Command::Simulate {
            path,
            state,
            shots,
            seed,
            input,
        } => cmd_simulate(&path, state as usize, shots, seed, &input),
    }
}

fn verdict_code(v: bool) -> i32 {
    if v {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    }
}

fn cmd_check(input: &OverlapArgs) -> Result<Outcome, CliError> {
    let (ka, kb) = input.resolve()?;
    let report = check_global_optimality(ka, kb)?;
    Ok(Outcome::ok(
        verdict_code(report.verdict),
        to_precise_json(&report) + "\n",
    ))
}

fn write_output(path: Option<&Path>, text: String) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
        _ => Ok(text),
    }
}

fn cmd_construct(input: &OverlapArgs, out: &Path) -> Result<Outcome, CliError> {
    let (ka, kb) = input.resolve()?;
    let report = check_global_optimality(ka, kb)?;
    if !report.verdict {
        return Ok(Outcome {
            code: EXIT_FALSE,
            stdout: String::new(),
            stderr: "no globally optimal sequential measurement\n".into(),
        });
    }
    let pair = prepare_pair(ka, kb)?;
    let seq = build_sequential(&pair)?;
    let flat = flatten(&seq);
    let (success, _) = verify_unambiguous(&flat, &joint_states(&pair), &EQUAL_PRIORS);
    let meta = Meta {
        ka: ka.to_pair(),
        kb: kb.to_pair(),
        branch: seq.branch.as_str().into(),
        kappa: seq.kappa,
        success: Some(success),
    };
    let doc = PovmDocument::from_povm9(&flat, meta, Some(&seq));
    let stdout = write_output(Some(out), to_precise_json(&doc) + "\n")?;
    Ok(Outcome::ok(EXIT_TRUE, stdout))
}

struct Loaded {
    doc: PovmDocument,
    ka: Overlap,
    kb: Overlap,
}

fn load(path: &Path, input: &OverlapArgs) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let doc = parse_document(&text).map_err(|e| CliError::data(e.to_string()))?;
    doc.povm9().map_err(|e| CliError::data(e.to_string()))?;
    doc.sequential().map_err(|e| CliError::data(e.to_string()))?;
    let (ka, kb) = if input.is_empty() {
        let k = |v: [f64; 2]| Overlap::from_parts(v[0], v[1]).map_err(|e| CliError::data(e.to_string()));
        (k(doc.meta.ka)?, k(doc.meta.kb)?)
    } else {
        input.resolve()?
    };
    Ok(Loaded { doc, ka, kb })
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    failures: Vec<String>,
    povm: PovmResiduals,
    success: f64,
    p_global: f64,
    error_residual: f64,
    /// Largest difference between the stored joint POVM and the one
    /// rebuilt from the sequential description.
    flatten_residual: Option<f64>,
    certificate: Option<CertificateReport>,
    certificate_error: Option<String>,
}

fn cmd_verify(path: &Path, input: &OverlapArgs) -> Result<Outcome, CliError> {
    let Loaded { doc, ka, kb } = load(path, input)?;
    let povm = doc.povm9().map_err(|e| CliError::data(e.to_string()))?;
    let pair = prepare_pair(ka, kb)?;
    let residuals = verify_povm(&povm);
    let (success, error_residual) = verify_unambiguous(&povm, &joint_states(&pair), &EQUAL_PRIORS);
    let p_global = global_optimum(&pair);

    let mut failures = Vec::new();
    if residuals.hermiticity > seqdisc::numerics::tol::HERM {
        failures.push(format!("hermiticity residual {:e}", residuals.hermiticity));
    }
    if residuals.psd_margin < -1e-12 || residuals.psd_margin.is_nan() {
        failures.push(format!("PSD margin {:e}", residuals.psd_margin));
    }
    if residuals.completeness > 1e-10 {
        failures.push(format!("completeness residual {:e}", residuals.completeness));
    }
    if error_residual > 1e-10 {
        failures.push(format!("unambiguity residual {error_residual:e}"));
    }
    if (success - p_global).abs() > 1e-10 {
        failures.push(format!("success {success} differs from the global optimum {p_global}"));
    }

    let (mut flatten_residual, mut certificate, mut certificate_error) = (None, None, None);
    if let Some(seq) = doc.sequential().map_err(|e| CliError::data(e.to_string()))? {
        let rebuilt = flatten(&seq);
        let r = povm
            .outcomes
            .iter()
            .zip(&rebuilt.outcomes)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max);
        if r > 1e-12 {
            failures.push(format!("flatten residual {r:e}"));
        }
        flatten_residual = Some(r);
        match dual_certificate(&pair, &seq) {
            Ok(c) => certificate = Some(c),
            Err(e) => {
                failures.push(e.to_string());
                certificate_error = Some(e.to_string());
            }
        }
    }
    let report = VerifyReport {
        passed: failures.is_empty(),
        failures,
        povm: residuals,
        success,
        p_global,
        error_residual,
        flatten_residual,
        certificate,
        certificate_error,
    };
    Ok(Outcome::ok(
        verdict_code(report.passed),
        to_precise_json(&report) + "\n",
    ))
}

fn cmd_simulate(path: &Path, state: usize, shots: u64, seed: u64, input: &OverlapArgs) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct SimReport {
        state: usize,
        shots: u64,
        seed: u64,
        labels: Vec<String>,
        counts: Vec<u64>,
        probabilities: Vec<f64>,
    }
    let Loaded { doc, ka, kb } = load(path, input)?;
    let povm = doc.povm9().map_err(|e| CliError::data(e.to_string()))?;
    let psi = joint_states(&prepare_pair(ka, kb)?)[state];
    let counts = sample_outcomes(&povm, &psi, shots, seed).map_err(|e| match e {
        Error::InvalidPovm(m) => CliError::data(m),
        e => e.into(),
    })?;
    let report = SimReport {
        state,
        shots,
        seed,
        labels: povm.labels.clone(),
        counts,
        probabilities: povm.probabilities(&psi),
    };
    Ok(Outcome::ok(EXIT_TRUE, to_precise_json(&report) + "\n"))
}

/// `{:.16e}`, or the empty string for non-finite values.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn grid(range: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let (lo, hi) = range;
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

fn parse_range(v: &Option<Vec<f64>>, default: (f64, f64), name: &str) -> Result<(f64, f64), CliError> {
    let r = v.as_ref().map_or(default, |v| (v[0], v[1]));
    if !(r.0.is_finite() && r.1.is_finite() && r.0 < r.1) {
        return Err(CliError::usage(format!("--{name} needs finite MIN < MAX")));
    }
    Ok(r)
}

fn verdict_row(report: Result<OptimalityReport, Error>) -> String {
    match report {
        Ok(r) => {
            let (c1, c2) = r
                .condition_values
                .map_or((String::new(), String::new()), |c| (fmt_float(c[0]), fmt_float(c[1])));
            format!(
                "{},{},{},{},{}",
                r.verdict,
                r.branch.as_str(),
                c1,
                c2,
                fmt_float(r.p_global)
            )
        }
        Err(_) => "NA,NA,,,".into(),
    }
}

/// Verdict for `K_A = K_B = K`, including canonicalization failures.
pub fn evaluate_point(ka: Result<Overlap, Error>, kb: Result<Overlap, Error>) -> Result<OptimalityReport, Error> {
    check_global_optimality(ka?, kb?)
}

fn cmd_scan(args: &ScanArgs) -> Result<Outcome, CliError> {
    if args.resolution < 2 {
        return Err(CliError::usage("--resolution must be at least 2"));
    }
    let n = args.resolution;
    let mut csv = String::new();
    match args.mode {
        ScanMode::ComplexK => {
            let h = 3f64.sqrt() / 2.0;
            let xr = parse_range(&args.x_range, (-0.5, 1.0), "x-range")?;
            let yr = parse_range(&args.y_range, (-h, h), "y-range")?;
            csv.push_str("re,im,verdict,branch,c1,c2,p_global\n");
            for re in grid(xr, n) {
                for im in grid(yr, n) {
                    let k = || Overlap::from_parts(re, im);
                    let _ = writeln!(
                        csv,
                        "{},{},{}",
                        fmt_float(re),
                        fmt_float(im),
                        verdict_row(evaluate_point(k(), k()))
                    );
                }
            }
        }
        ScanMode::PskGrid => {
            let xr = parse_range(&args.x_range, (0.01, 5.0), "x-range")?;
            let yr = parse_range(&args.y_range, (0.01, 5.0), "y-range")?;
            csv.push_str("s_a,s_b,verdict,branch,c1,c2,p_global\n");
            for sa in grid(xr, n) {
                for sb in grid(yr, n) {
                    let row = verdict_row(evaluate_point(psk_overlap(sa), psk_overlap(sb)));
                    let _ = writeln!(csv, "{},{},{}", fmt_float(sa), fmt_float(sb), row);
                }
            }
        }
        ScanMode::Copies => {
            let xr = parse_range(&args.x_range, (0.01, 3.0), "x-range")?;
            let yr = parse_range(&args.y_range, (2.0, 20.0), "y-range")?;
            if yr.0 < 2.0 || yr.0.fract() != 0.0 || yr.1.fract() != 0.0 {
                return Err(CliError::usage("--y-range for copies must be integers >= 2"));
            }
            csv.push_str("s_total,n,sufficient,failing_level\n");
            for s in grid(xr, n) {
                for copies in (yr.0 as usize)..=(yr.1 as usize) {
                    let row = match check_copies_psk(s, copies) {
                        Ok(r) => format!(
                            "{},{}",
                            r.sufficient,
                            r.failing_level.map_or(String::new(), |l| l.to_string())
                        ),
                        Err(_) => "NA,".into(),
                    };
                    let _ = writeln!(csv, "{},{copies},{row}", fmt_float(s));
                }
            }
        }
    }
    let stdout = write_output(args.out.as_deref(), csv)?;
    Ok(Outcome::ok(EXIT_TRUE, stdout))
}

/// One row of the PSK curve: `(S, p_global, verdict, p_sequential)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub s: f64,
    pub p_global: f64,
    pub verdict: bool,
    /// Success of the constructed sequential measurement; `None` when the
    /// verdict is false.
    pub p_sequential: Option<f64>,
}

pub fn psk_curve(s_max: f64, step: f64) -> Result<Vec<CurveRow>, Error> {
    let count = (s_max / step + 1e-9).floor() as usize;
    (1..=count)
        .map(|i| {
            let s = i as f64 * step;
            let k = psk_overlap(s)?;
            let pair = prepare_pair(k, k)?;
            let report = report_for_pair(k, k, &pair);
            let p_sequential = if report.verdict {
                let flat = flatten(&build_sequential(&pair)?);
                Some(verify_unambiguous(&flat, &joint_states(&pair), &EQUAL_PRIORS).0)
            } else {
                None
            };
            Ok(CurveRow {
                s,
                p_global: report.p_global,
                verdict: report.verdict,
                p_sequential,
            })
        })
        .collect()
}

fn cmd_curve(args: &CurveArgs) -> Result<Outcome, CliError> {
    if !(args.step > 0.0 && args.step.is_finite()) {
        return Err(CliError::usage("--step must be positive"));
    }
    if !(args.s_max >= args.step && args.s_max.is_finite()) {
        return Err(CliError::usage("--s-max must be at least --step"));
    }
    let CurveMode::PskGlobal = args.mode;
    let mut csv = String::from("s,p_global,verdict,p_sequential\n");
    for r in psk_curve(args.s_max, args.step)? {
        let seq = r.p_sequential.map_or(String::new(), fmt_float);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_float(r.s),
            fmt_float(r.p_global),
            r.verdict,
            seq
        );
    }
    let stdout = write_output(args.out.as_deref(), csv)?;
    Ok(Outcome::ok(EXIT_TRUE, stdout))
}
