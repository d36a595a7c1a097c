//! `copos`: copositivity checks for symmetric tensors stored as JSON.
//!
//! Exit codes: 0 member/copositive/pass, 1 refuted, 2 undecided, 3 usage,
//! 4 unreadable input, 5 size cap exceeded.

use std::fmt::Write as _;
use std::io::{Read, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use copositive::combinatorics::binomial_u128;
use copositive::grid::{member_o_r, GridMembership};
use copositive::io::{
    input_digest, parse_rational, parse_tensor, verify_document, CertificateDocument, Method,
    Verdict, VerifyOutcome, WitnessDoc,
};
use copositive::limits;
use copositive::oracle::{fullspace_sample_min, lattice_probes, simplex_grid_min, DEFAULT_SEED};
use copositive::partition::{
    self, certify_copositivity, member_i_p, member_o_p, CertifyOptions, Discipline, Partition,
};
use copositive::polycone::{expand_pr_convolution, member_c_r_exact, CoefMembership};
use copositive::scalar::rational_to_string;
use copositive::screen::{necessary_screen, ScreenFailure, ScreenOutcome};
use copositive::soscone::{
    lift_verified, member_k_r, CertifiedBy, GramCertificate, SolverOptions, SosMembership,
};
use copositive::RationalTensor;
use serde_json::json;

#[derive(Parser)]
#[command(name = "copos", version, about = "Copositivity certificates for symmetric tensors")]
struct Cli {
    /// Worker threads (1 gives the sequential reference run).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Tensor document, or `-` for stdin.
    file: PathBuf,
    /// Also write the output document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMethod {
    Coef,
    Sos,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum DisciplineArg {
    Fifo,
    Lifo,
}

#[derive(Subcommand)]
enum Command {
    /// Membership in one level of a hierarchy.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        method: CheckMethod,
        #[arg(long, default_value_t = 0)]
        level: u32,
    },
    /// Branch and bound over simplicial partitions.
    Certify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 32)]
        max_depth: u32,
        /// Maximum number of simplices examined.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long, value_enum, default_value = "fifo")]
        discipline: DisciplineArg,
    },
    /// Coefficient table of the level-r expansion.
    Expand {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long)]
        json: bool,
    },
    /// Brute-force minimum on a simplex grid or over sampled directions.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Grid resolution m (points with m·x integral).
        #[arg(long, conflicts_with_all = ["samples", "seed", "probe", "lattice_probes"])]
        resolution: Option<u32>,
        /// Number of seeded full-space samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Extra direction to evaluate, comma separated; repeatable.
        #[arg(long, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
        probe: Vec<String>,
        /// Add every nonzero vector in {-2..2}^n (n ≤ 4).
        #[arg(long)]
        lattice_probes: bool,
    },
    /// Cheap necessary conditions.
    Screen {
        #[command(flatten)]
        input: Input,
    },
    /// Every hierarchy at every level, as a verdict matrix.
    Compare {
        #[command(flatten)]
        input: Input,
        /// `R` or `a..b` (inclusive).
        #[arg(long, default_value = "0..2")]
        levels: String,
        #[arg(long)]
        json: bool,
        /// Leave out the SOS column.
        #[arg(long)]
        no_sos: bool,
    },
    /// Re-check a certificate against its tensor.
    Verify {
        /// Tensor document the certificate claims to be about.
        file: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 3,
            Failure::Input(_) => 4,
            Failure::Cap(_) => 5,
        }
    }
}

impl From<copositive::Error> for Failure {
    fn from(e: copositive::Error) -> Self {
        match e {
            copositive::Error::SizeCap { .. } => Failure::Cap(e.to_string()),
            copositive::Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// What a subcommand prints and how it exits.
struct Report {
    stdout: String,
    code: u8,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn load(path: &Path) -> Result<RationalTensor, Failure> {
    let text = read_text(path)?;
    parse_tensor(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn expansion_size(a: &RationalTensor, r: u32) -> u128 {
    let s = a.d() as u64 + r as u64;
    binomial_u128(a.n() as u64 + s - 1, s)
}

fn certificate_report(doc: &CertificateDocument) -> Report {
    Report {
        stdout: doc.to_json(),
        code: doc.verdict.exit_code() as u8,
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn check_coef(a: &RationalTensor, r: u32) -> Result<CertificateDocument, Failure> {
    limits::check("expansion coefficients", expansion_size(a, r))?;
    let m = member_c_r_exact(a, r as usize);
    let verdict = if m.is_member() { Verdict::Member } else { Verdict::NotMember };
    let mut doc = CertificateDocument::new(verdict, Method::Coef, a);
    doc.level = Some(r);
    if let CoefMembership::NotMember { theta, value } = m {
        doc.witness = Some(WitnessDoc::new(&[], &value));
        doc.theta = Some(theta);
    }
    Ok(doc)
}

fn check_sos(a: &RationalTensor, r: u32) -> Result<CertificateDocument, Failure> {
    let basis = expansion_size(a, r);
    limits::check("expansion coefficients", basis)?;
    limits::check("Gram matrix entries", basis.saturating_mul(basis))?;
    let m = member_k_r(a, r as usize, &SolverOptions::default());
    let mut doc;
    match m {
        SosMembership::Certified { certificate, via } => {
            doc = CertificateDocument::new(Verdict::Member, Method::Sos, a);
            doc.stats.iterations = Some(certificate.iterations);
            doc.stats.residual = finite(certificate.residual);
            doc.stats.min_eig = finite(certificate.min_eig);
            doc.stats.reason = Some(
                match via {
                    CertifiedBy::Coefficients => "nonnegative coefficients".into(),
                    CertifiedBy::Solver => "Gram solver".into(),
                    CertifiedBy::Lifted { from } => format!("lifted from level {from}"),
                },
            );
            doc.gram = Some(certificate);
        }
        SosMembership::Unknown(stats) => {
            doc = CertificateDocument::new(Verdict::Unknown, Method::Sos, a);
            doc.stats.iterations = Some(stats.iterations);
            doc.stats.residual = finite(stats.residual);
            doc.stats.min_eig = finite(stats.min_eig);
        }
    }
    doc.level = Some(r);
    Ok(doc)
}

fn check_grid(a: &RationalTensor, r: u32) -> Result<CertificateDocument, Failure> {
    let mut doc = match member_o_r(a, r)? {
        GridMembership::Member { points_checked } => {
            let mut doc = CertificateDocument::new(Verdict::Member, Method::Grid, a);
            doc.stats.points_checked = Some(points_checked);
            doc
        }
        GridMembership::NotMember(w) => {
            let mut doc = CertificateDocument::new(Verdict::NotMember, Method::Grid, a);
            doc.witness = Some(WitnessDoc::new(&w.point, &w.value));
            doc
        }
    };
    doc.level = Some(r);
    Ok(doc)
}

fn certify(
    a: &RationalTensor,
    max_depth: u32,
    budget: usize,
    discipline: DisciplineArg,
    parallel: bool,
) -> CertificateDocument {
    let opts = CertifyOptions {
        max_depth,
        simplex_budget: budget,
        discipline: match discipline {
            DisciplineArg::Fifo => Discipline::Fifo,
            DisciplineArg::Lifo => Discipline::Lifo,
        },
        parallel,
    };
    let c = certify_copositivity(a, &opts);
    let verdict = match c.verdict {
        partition::Verdict::Copositive => Verdict::Copositive,
        partition::Verdict::NotCopositive => Verdict::NotCopositive,
        partition::Verdict::StrictlyIndeterminate => Verdict::StrictlyIndeterminate,
    };
    let mut doc = CertificateDocument::new(verdict, Method::Partition, a);
    doc.depth = Some(c.stats.depth);
    doc.witness = c.witness.as_ref().map(|w| WitnessDoc::new(&w.point, &w.value));
    doc.stats.simplices_examined = Some(c.stats.simplices_examined);
    doc.stats.simplices_pruned = Some(c.stats.simplices_pruned);
    doc.stats.unresolved = Some(c.stats.unresolved);
    doc.stats.diameter = finite(c.stats.diameter);
    doc.stats.max_depth = Some(max_depth);
    doc.stats.budget = Some(budget);
    doc
}

fn screen(a: &RationalTensor) -> CertificateDocument {
    match necessary_screen(a) {
        ScreenOutcome::Pass => CertificateDocument::new(Verdict::Pass, Method::Screen, a),
        ScreenOutcome::Fail { reason, witness, value } => {
            let mut doc = CertificateDocument::new(Verdict::Fail, Method::Screen, a);
            doc.witness = Some(WitnessDoc::new(&witness, &value));
            doc.stats.reason = Some(match reason {
                ScreenFailure::NegativeDiagonal { index } => {
                    format!("negative diagonal entry at index {}", index + 1)
                }
                ScreenFailure::NegativeEdgeTerm { from, toward, entry } => {
                    let idx: Vec<String> = entry.iter().map(|i| (i + 1).to_string()).collect();
                    format!(
                        "negative leading term from vertex {} toward {} (entry [{}])",
                        from + 1,
                        toward + 1,
                        idx.join(",")
                    )
                }
            });
            doc
        }
    }
}

fn expand(a: &RationalTensor, r: u32, as_json: bool) -> Result<Report, Failure> {
    limits::check("expansion coefficients", expansion_size(a, r))?;
    let e = expand_pr_convolution(a, r as usize);
    let member = e.coeffs.values().all(|v| *v >= num_traits::zero());
    let stdout = if as_json {
        let rows: Vec<_> = e
            .coeffs
            .iter()
            .map(|(theta, v)| json!({"theta": theta.as_slice(), "value": rational_to_string(v)}))
            .collect();
        serde_json::to_string_pretty(&json!({
            "n": a.n(),
            "d": a.d(),
            "level": r,
            "input_digest": input_digest(a),
            "coefficients": rows,
        }))
        .expect("serialisable")
    } else {
        let mut s = String::new();
        for (theta, v) in &e.coeffs {
            let _ = writeln!(s, "{theta}\t{}", rational_to_string(v));
        }
        s.trim_end().to_string()
    };
    Ok(Report { stdout, code: if member { 0 } else { 1 } })
}

fn parse_probe(text: &[String], n: usize) -> Result<Vec<Vec<f64>>, Failure> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if !text.len().is_multiple_of(n) {
        return Err(Failure::Usage(format!(
            "--probe takes {n} comma-separated coordinates per direction"
        )));
    }
    let coords = text
        .iter()
        .map(|t| {
            parse_rational(t)
                .map(|q| copositive::scalar::Scalar::to_f64(&q))
                .map_err(|e| Failure::Usage(format!("--probe: {e}")))
        })
        .collect::<Result<Vec<f64>, Failure>>()?;
    Ok(coords.chunks(n).map(<[f64]>::to_vec).collect())
}

fn oracle(
    a: &RationalTensor,
    resolution: Option<u32>,
    samples: Option<usize>,
    seed: Option<u64>,
    probe: &[String],
    lattice: bool,
) -> Result<Report, Failure> {
    if let Some(m) = resolution {
        let g = simplex_grid_min(a, m)?;
        let negative = g.min_value < num_traits::zero();
        let out = json!({
            "mode": "grid",
            "resolution": m,
            "points": g.points,
            "min_value": rational_to_string(&g.min_value),
            "argmin": g.argmin.iter().map(rational_to_string).collect::<Vec<_>>(),
        });
        return Ok(Report {
            stdout: serde_json::to_string_pretty(&out).expect("serialisable"),
            code: if negative { 1 } else { 0 },
        });
    }
    let mut probes = parse_probe(probe, a.n())?;
    if lattice {
        probes.extend(lattice_probes(a.n()));
    }
    let samples = match samples {
        Some(k) => k,
        None if probes.is_empty() => {
            return Err(Failure::Usage("oracle needs --resolution, --samples or --probe".into()))
        }
        None => 0,
    };
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let s = fullspace_sample_min(a, samples, seed, &probes)?;
    let out = json!({
        "mode": "samples",
        "samples": s.samples,
        "probes": s.probes,
        "seed": s.seed,
        "min_value": s.min_value,
        "argmin": s.argmin,
    });
    Ok(Report {
        stdout: serde_json::to_string_pretty(&out).expect("serialisable"),
        code: if s.min_value < 0.0 { 1 } else { 0 },
    })
}

fn parse_levels(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::Usage(format!("--levels expects R or a..b, got {text:?}"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => (0, text.trim().parse().map_err(|_| bad())?),
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn label(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "member",
        Some(false) => "not_member",
        None => "unknown",
    }
}

fn compare(a: &RationalTensor, levels: &str, as_json: bool, no_sos: bool) -> Result<Report, Failure> {
    let (lo, hi) = parse_levels(levels)?;
    let mut rows = Vec::new();
    let opts = SolverOptions::default();
    let mut prev_gram: Option<GramCertificate> = None;
    let mut inner_member = false;
    let mut outer_refuted = false;
    for r in lo..=hi {
        limits::check("expansion coefficients", expansion_size(a, r))?;
        let coef = member_c_r_exact(a, r as usize).is_member();
        let sos = if no_sos {
            None
        } else {
            let basis = expansion_size(a, r);
            limits::check("Gram matrix entries", basis.saturating_mul(basis))?;
            let lifted = prev_gram
                .as_ref()
                .filter(|g| g.r + 1 == r as usize)
                .and_then(|g| lift_verified(a, g, &opts));
            prev_gram = match lifted {
                Some(g) => Some(g),
                None => match member_k_r(a, r as usize, &opts) {
                    SosMembership::Certified { certificate, .. } => Some(certificate),
                    SosMembership::Unknown(_) => None,
                },
            };
            prev_gram.is_some().then_some(true)
        };
        let p = Partition::level_capped(a.n(), r, limits::max_points())?;
        let inner_p = member_i_p(a, &p);
        let outer_p = member_o_p(a, &p);
        let grid = member_o_r(a, r)?.is_member();
        inner_member |= coef || sos == Some(true) || inner_p;
        outer_refuted |= !outer_p || !grid;
        rows.push(json!({
            "level": r,
            "coef": label(Some(coef)),
            "sos": if no_sos { "skipped" } else { label(sos) },
            "inner_partition": label(Some(inner_p)),
            "outer_partition": label(Some(outer_p)),
            "grid": label(Some(grid)),
            "partition_simplices": p.len(),
        }));
    }
    let (conclusion, code) = match (inner_member, outer_refuted) {
        (true, _) => ("copositive", 0),
        (false, true) => ("not_copositive", 1),
        (false, false) => ("undecided", 2),
    };
    let stdout = if as_json {
        serde_json::to_string_pretty(&json!({
            "input_digest": input_digest(a),
            "levels": rows,
            "conclusion": conclusion,
        }))
        .expect("serialisable")
    } else {
        let mut s = format!(
            "{:>5}  {:<11} {:<11} {:<11} {:<11} {:<11}\n",
            "level", "C(r)", "K(r)", "I(P_r)", "O(P_r)", "O(r)"
        );
        for row in &rows {
            let cell = |k: &str| row[k].as_str().unwrap_or("").to_string();
            let _ = writeln!(
                s,
                "{:>5}  {:<11} {:<11} {:<11} {:<11} {:<11}",
                row["level"].as_u64().unwrap_or(0),
                cell("coef"),
                cell("sos"),
                cell("inner_partition"),
                cell("outer_partition"),
                cell("grid")
            );
        }
        let _ = write!(s, "conclusion: {conclusion}");
        s
    };
    Ok(Report { stdout, code })
}

fn verify(file: &Path, cert: &Path) -> Result<Report, Failure> {
    let a = load(file)?;
    let text = read_text(cert)?;
    let doc = CertificateDocument::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", cert.display())))?;
    let (status, detail, code) = match verify_document(&doc, &a) {
        VerifyOutcome::Confirmed(m) => ("confirmed", m, 0),
        VerifyOutcome::Rejected(m) => ("rejected", m, 1),
        VerifyOutcome::NothingToVerify => ("nothing_to_verify", String::new(), 2),
    };
    let out = json!({"status": status, "detail": detail, "verdict": doc.verdict, "method": doc.method});
    Ok(Report {
        stdout: serde_json::to_string_pretty(&out).expect("serialisable"),
        code,
    })
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let parallel = cli.threads != Some(1);
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    let (report, out) = match &cli.command {
        Command::Check { input, method, level } => {
            let a = load(&input.file)?;
            let doc = match method {
                CheckMethod::Coef => check_coef(&a, *level)?,
                CheckMethod::Sos => check_sos(&a, *level)?,
                CheckMethod::Grid => check_grid(&a, *level)?,
            };
            (certificate_report(&doc), input.out.as_ref())
        }
        Command::Certify { input, max_depth, budget, discipline } => {
            if *budget == 0 {
                return Err(Failure::Usage("--budget must be positive".into()));
            }
            let a = load(&input.file)?;
            let doc = certify(&a, *max_depth, *budget, *discipline, parallel);
            (certificate_report(&doc), input.out.as_ref())
        }
        Command::Expand { input, level, json } => {
            let a = load(&input.file)?;
            (expand(&a, *level, *json)?, input.out.as_ref())
        }
        Command::Oracle { input, resolution, samples, seed, probe, lattice_probes } => {
            let a = load(&input.file)?;
            let r = oracle(&a, *resolution, *samples, *seed, probe, *lattice_probes)?;
            (r, input.out.as_ref())
        }
        Command::Screen { input } => {
            let a = load(&input.file)?;
            (certificate_report(&screen(&a)), input.out.as_ref())
        }
        Command::Compare { input, levels, json, no_sos } => {
            let a = load(&input.file)?;
            (compare(&a, levels, *json, *no_sos)?, input.out.as_ref())
        }
        Command::Verify { file, cert } => (verify(file, cert)?, None),
    };
    write_out(out, &report.stdout)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(r) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", r.stdout);
            ExitCode::from(r.code)
        }
        Err(f) => {
            let (Failure::Usage(m) | Failure::Input(m) | Failure::Cap(m)) = &f;
            eprintln!("copos: {m}");
            ExitCode::from(f.code())
        }
    }
}
