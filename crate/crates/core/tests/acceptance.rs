//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use copositive::examples::{
    difference_square, nonnegative_quartic, sextic_sos_certificate, sextic_sos_example,
};
use copositive::grid::member_o_r;
use copositive::io::parse_tensor;
use copositive::oracle::{expand_bruteforce, fullspace_sample_min, simplex_grid_min, DEFAULT_SEED};
use copositive::partition::{
    certify_copositivity, member_i_p, member_i_p_full, member_o_p, CertifyOptions, Partition,
    Verdict,
};
use copositive::polycone::{expand_pr, expand_pr_closed_form, member_c_r_exact};
use copositive::scalar::{rational_to_string, ratio};
use copositive::screen::necessary_screen;
use copositive::soscone::{
    build_gram_problem, member_k_r, solve_gram, verify_certificate, GramCertificate, GramOutcome,
    SolverOptions, SosMembership,
};
use copositive::RationalTensor;
use num_rational::BigRational;
use num_traits::Signed;
use rand::Rng;

const EIG_TOL: f64 = 1e-8;
const MATCH_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const EXAMPLE_DOC: &str = r#"{
  "n": 3, "d": 4, "default": "5",
  "entries": [
    {"idx": [1,1,1,1], "val": "0"},
    {"idx": [2,2,2,2], "val": "1"},
    {"idx": [3,3,3,3], "val": "1"}
  ]
}"#;

fn ac1_example() -> Outcome {
    let start = Instant::now();
    let a = match parse_tensor(EXAMPLE_DOC) {
        Ok(a) => a,
        Err(e) => return outcome(false, format!("parse failed: {e}")),
    };
    let parsed_ok = a == nonnegative_quartic();
    let screen = necessary_screen(&a).passed();
    let c0 = member_c_r_exact(&a, 0).is_member();
    let cert = certify_copositivity(&a, &CertifyOptions::default());
    let certified = cert.verdict == Verdict::Copositive && cert.stats.depth == 0;
    let probe = vec![-2.0, 0.0, 1.0];
    let s = fullspace_sample_min(&a, 1000, DEFAULT_SEED, &[probe]).unwrap();
    let exact = a.eval(&[ratio(-2, 1), ratio(0, 1), ratio(1, 1)]).unwrap();
    let elapsed = start.elapsed();
    let pass = parsed_ok
        && screen
        && c0
        && certified
        && s.min_value < 0.0
        && exact.is_negative()
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "parsed={parsed_ok} screen={screen} C(0)={c0} certify={:?}@depth{} \
             sample_min={:.4} f(-2,0,1)={} time={:.3}s",
            cert.verdict,
            cert.stats.depth,
            s.min_value,
            rational_to_string(&exact),
            elapsed.as_secs_f64()
        ),
    )
}

fn ac2_expansion() -> Outcome {
    let start = Instant::now();
    let mut r = common::rng(2);
    let mut tensors = 0;
    let mut comparisons = 0;
    let mut mismatches = Vec::new();
    for n in 1..=3 {
        for d in 2..=4 {
            for _ in 0..6 {
                let a = common::random_tensor(&mut r, n, d, -20);
                tensors += 1;
                for level in 0..=3 {
                    let truth = expand_bruteforce(&a, level).unwrap();
                    let direct = expand_pr(&a, level).doubled_nonzero();
                    let closed = expand_pr_closed_form(&a, level).doubled_nonzero();
                    comparisons += 1;
                    if direct != truth || closed != truth {
                        mismatches.push(format!("n={n} d={d} r={level}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && tensors >= 50 && elapsed < Duration::from_secs(60),
        format!(
            "{tensors} tensors, {comparisons} (tensor, r) pairs, {} mismatches {:?}, time={:.1}s",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    )
}

/// `I^P` test that is monotone under refinement for every order.
fn inner_partition(a: &RationalTensor, p: &Partition) -> bool {
    if a.d() == 2 {
        member_i_p(a, p)
    } else {
        member_i_p_full(a, p)
    }
}

fn ac3_containment() -> Outcome {
    let suite = common::mixed_suite(3, 240);
    let mut rng = common::rng(33);
    let opts = SolverOptions::default();
    let mut violations: Vec<String> = Vec::new();
    let mut c_members = 0;
    let mut refinements = 0;
    let levels: Vec<Partition> = (0..=2).map(|r| Partition::level(3, r)).collect();
    let levels2: Vec<Partition> = (0..=2).map(|r| Partition::level(2, r)).collect();
    for (k, a) in suite.iter().enumerate() {
        let partitions = if a.n() == 2 { &levels2 } else { &levels };
        let c: Vec<bool> = (0..=3).map(|r| member_c_r_exact(a, r).is_member()).collect();
        for r in 0..3 {
            if c[r] && !c[r + 1] {
                violations.push(format!("#{k} (a) C({r}) not in C({})", r + 1));
            }
        }
        for r in 0..=2 {
            if !c[r] {
                continue;
            }
            c_members += 1;
            match member_k_r(a, r, &opts) {
                SosMembership::Certified { certificate, .. } => {
                    if !verify_certificate(a, &certificate, EIG_TOL, MATCH_TOL).ok {
                        violations.push(format!("#{k} (b) K({r}) certificate rejected"));
                    }
                }
                SosMembership::Unknown(_) => violations.push(format!("#{k} (b) C({r}) member not in K({r})")),
            }
            for (level, p) in partitions.iter().enumerate().skip(r) {
                if !member_i_p(a, p) {
                    violations.push(format!("#{k} (c) C({r}) member fails I^P at level {level}"));
                }
            }
        }
        let o: Vec<bool> = (0..=4).map(|r| member_o_r(a, r).unwrap().is_member()).collect();
        for r in 0..4 {
            if o[r + 1] && !o[r] {
                violations.push(format!("#{k} (d) O({}) not in O({r})", r + 1));
            }
        }
        // Random refinement chains.
        let mut p = Partition::trivial(a.n());
        for step in 0..4 {
            let seed: u64 = rng.random();
            let q = p
                .refine_where(|i, _| (seed >> (i % 64)) & 1 == 1 || i == 0)
                .unwrap();
            refinements += 1;
            if inner_partition(a, &p) && !inner_partition(a, &q) {
                violations.push(format!("#{k} (e) I^P lost on refinement step {step}"));
            }
            if member_o_p(a, &q) && !member_o_p(a, &p) {
                violations.push(format!("#{k} (e) O^P gained on refinement step {step}"));
            }
            p = q;
        }
    }
    outcome(
        violations.is_empty() && suite.len() >= 200,
        format!(
            "{} instances, {c_members} C(r) memberships, {refinements} refinements, {} violations {:?}",
            suite.len(),
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn ac4_strict() -> Outcome {
    let start = Instant::now();
    let a = difference_square();
    let explicit = GramCertificate {
        r: 0,
        monomials: vec![vec![
            copositive::combinatorics::ExponentVector::new(vec![2, 0]),
            copositive::combinatorics::ExponentVector::new(vec![0, 2]),
        ]],
        matrices: vec![copositive::linalg::SymMatrix { n: 2, data: vec![1.0, -1.0, -1.0, 1.0] }],
        residual: 0.0,
        min_eig: 0.0,
        iterations: 0,
    };
    let square_ok = verify_certificate(&a, &explicit, EIG_TOL, MATCH_TOL).ok;
    let solver_ok = member_k_r(&a, 0, &SolverOptions::default()).is_certified();
    let never_c = (0..=5).all(|r| !member_c_r_exact(&a, r).is_member());
    let s = sextic_sos_example();
    let sextic_k = verify_certificate(&s, &sextic_sos_certificate(), EIG_TOL, MATCH_TOL).ok;
    let sextic_not_n = !member_c_r_exact(&s, 0).is_member();
    let elapsed = start.elapsed();
    outcome(
        square_ok && solver_ok && never_c && sextic_k && sextic_not_n && elapsed < Duration::from_secs(10),
        format!(
            "square: K(0) explicit={square_ok} solver={solver_ok}, not in C(0..5)={never_c}; \
             sextic: K(0)={sextic_k} not entrywise nonnegative={sextic_not_n}; time={:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

struct Classified {
    tensor: RationalTensor,
    oracle_min: BigRational,
}

/// Random tensors with entries in `[−1, 1]`, kept until both margin classes
/// have at least `per_class` members.
fn bnb_suite(per_class: usize) -> Vec<Classified> {
    let mut r = common::rng(5);
    let mut out = Vec::new();
    let (mut pos, mut neg) = (0, 0);
    let margin = ratio(1, 20);
    while pos < per_class || neg < per_class {
        let n = r.random_range(2..=3);
        let d = r.random_range(2..=4);
        let lo = [-20, -8, -4, -2, 0][r.random_range(0..5)];
        let a = if r.random_bool(0.5) {
            common::random_tensor(&mut r, n, d, lo)
        } else {
            common::random_tensor_nonneg_diagonal(&mut r, n, d, lo)
        };
        let m = simplex_grid_min(&a, 50).unwrap().min_value;
        if m >= margin {
            if pos >= per_class {
                continue;
            }
            pos += 1;
        } else if m <= -margin.clone() {
            if neg >= per_class {
                continue;
            }
            neg += 1;
        }
        out.push(Classified { tensor: a, oracle_min: m });
    }
    out
}

fn ac5_branch_and_bound(suite: &[Classified]) -> Outcome {
    let margin = ratio(1, 20);
    let opts = CertifyOptions { max_depth: 32, ..CertifyOptions::default() };
    let mut bad = Vec::new();
    let (mut pos, mut neg) = (0, 0);
    let mut slowest = Duration::ZERO;
    let mut deepest = 0;
    for (k, c) in suite.iter().enumerate() {
        let want = if c.oracle_min >= margin {
            Verdict::Copositive
        } else if c.oracle_min <= -margin.clone() {
            Verdict::NotCopositive
        } else {
            continue;
        };
        let start = Instant::now();
        let cert = certify_copositivity(&c.tensor, &opts);
        let t = start.elapsed();
        slowest = slowest.max(t);
        deepest = deepest.max(cert.stats.depth);
        if t >= Duration::from_secs(5) {
            bad.push(format!("#{k} took {:.1}s", t.as_secs_f64()));
        }
        if cert.verdict != want {
            bad.push(format!("#{k} got {:?}, oracle min {}", cert.verdict, rational_to_string(&c.oracle_min)));
            continue;
        }
        if want == Verdict::Copositive {
            pos += 1;
        } else {
            neg += 1;
            let ok = cert.witness.as_ref().is_some_and(|w| {
                w.point.iter().all(|x| !x.is_negative())
                    && c.tensor.eval(&w.point).unwrap() == w.value
                    && w.value.is_negative()
            });
            if !ok {
                bad.push(format!("#{k} witness does not verify"));
            }
        }
    }
    outcome(
        bad.is_empty() && pos + neg >= 100,
        format!(
            "{pos} copositive + {neg} refuted, {} misclassified {:?}, deepest={deepest}, slowest={:.3}s",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>(),
            slowest.as_secs_f64()
        ),
    )
}

fn ac6_grid(suite: &[Classified]) -> Outcome {
    let margin = ratio(1, 20);
    let zero = ratio(0, 1);
    let mut bad = Vec::new();
    let (mut refuted, mut kept) = (0, 0);
    let mut latest_refutation = 0;
    for (k, c) in suite.iter().enumerate() {
        let members: Vec<bool> = (0..=12).map(|r| member_o_r(&c.tensor, r).unwrap().is_member()).collect();
        if c.oracle_min <= -margin.clone() {
            match members.iter().position(|m| !m) {
                Some(r) => {
                    refuted += 1;
                    latest_refutation = latest_refutation.max(r);
                }
                None => bad.push(format!("#{k} never refuted up to r=12")),
            }
        } else if c.oracle_min >= zero {
            kept += 1;
            if let Some(r) = members.iter().position(|m| !m) {
                bad.push(format!("#{k} refuted at r={r} despite oracle min ≥ 0"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{refuted} refuted (latest at r={latest_refutation}), {kept} members through r=12, {} violations {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn ac7_z_tensors() -> Outcome {
    let mut r = common::rng(7);
    let mut certified = 0;
    let mut tried = 0;
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    let opts = CertifyOptions { simplex_budget: 200_000, ..CertifyOptions::default() };
    while certified < 60 && tried < 2000 {
        tried += 1;
        let n = r.random_range(2..=3);
        let d = [2, 4][r.random_range(0..2)];
        let a = common::z_tensor(&mut r, n, d);
        if certify_copositivity(&a, &opts).verdict != Verdict::Copositive {
            continue;
        }
        certified += 1;
        let s = fullspace_sample_min(&a, 10_000, DEFAULT_SEED + tried as u64, &[]).unwrap();
        worst = worst.min(s.min_value);
        if s.min_value < -1e-9 {
            bad.push(format!("n={n} d={d} min={:.3e}", s.min_value));
        }
    }
    outcome(
        bad.is_empty() && certified >= 50,
        format!(
            "{certified} certified of {tried} drawn, smallest sampled value {worst:.3e}, {} below -1e-9 {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn ac8_sos_checker() -> Outcome {
    let mut r = common::rng(8);
    let opts = SolverOptions::default();
    let mut certified = 0;
    let mut attempted = 0;
    let mut bad = Vec::new();
    let (mut worst_res, mut worst_eig) = (0.0f64, f64::INFINITY);
    let mut record = |a: &RationalTensor, c: &GramCertificate, label: String, bad: &mut Vec<String>| {
        let check = verify_certificate(a, c, EIG_TOL, MATCH_TOL);
        worst_res = worst_res.max(check.residual);
        worst_eig = worst_eig.min(check.min_eig);
        if !(check.ok && check.residual <= MATCH_TOL && check.min_eig >= -EIG_TOL) {
            bad.push(label);
        }
    };
    // Raw solver output, before any filtering by the membership wrapper.
    let mut instances: Vec<(RationalTensor, usize)> = Vec::new();
    for _ in 0..24 {
        let n = r.random_range(2..=3);
        let d = [2, 4][r.random_range(0..2)];
        instances.push((common::power_sum(&mut r, n, d, 2), r.random_range(0..=1)));
    }
    for a in common::mixed_suite(88, 16) {
        instances.push((a, 0));
    }
    instances.push((difference_square(), 0));
    instances.push((difference_square(), 1));
    for (k, (a, level)) in instances.iter().enumerate() {
        attempted += 1;
        if let GramOutcome::Certified(c) = solve_gram(&build_gram_problem(a, *level), &opts) {
            certified += 1;
            record(a, &c, format!("solver #{k}"), &mut bad);
        }
        if let SosMembership::Certified { certificate, .. } = member_k_r(a, *level, &opts) {
            certified += 1;
            record(a, &certificate, format!("member_k_r #{k}"), &mut bad);
        }
    }
    outcome(
        bad.is_empty() && certified > 0,
        format!(
            "{certified} certificates from {attempted} problems, worst residual {worst_res:.2e}, \
             smallest eigenvalue {worst_eig:.2e}, {} rejected {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, o: Outcome| {
        println!("{name} {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report("AC1 example reproduction", ac1_example());
    report("AC2 expansion equivalence", ac2_expansion());
    report("AC3 containment suite", ac3_containment());
    report("AC4 strict containment", ac4_strict());
    let suite = bnb_suite(60);
    report("AC5 branch and bound", ac5_branch_and_bound(&suite));
    report("AC6 grid convergence", ac6_grid(&suite));
    report("AC7 Z-tensor cross-check", ac7_z_tensors());
    report("AC8 SOS self-verification", ac8_sos_checker());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
