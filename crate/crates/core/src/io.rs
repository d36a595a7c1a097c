//! JSON documents for tensors and certificates.
//!
//! Indices are 1-based in documents and 0-based in the library. Scalars are
//! strings, either `"p/q"` or a decimal such as `"-0.125"` or `"3e-2"`, always
//! parsed exactly; plain JSON integers are accepted too.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::ExponentVector;
use crate::error::{Error, Result};
use crate::grid::member_o_r;
use crate::partition::{certify_copositivity, CertifyOptions, Discipline};
use crate::polycone::{expand_pr, member_c_r_exact};
use crate::scalar::rational_to_string;
use crate::screen::necessary_screen;
use crate::soscone::{verify_certificate, GramCertificate};
use crate::tensor::RationalTensor;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact scalar as written in a document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarText {
    Text(String),
    Integer(i64),
}

impl ScalarText {
    pub fn parse(&self) -> Result<BigRational> {
        match self {
            ScalarText::Text(s) => parse_rational(s),
            ScalarText::Integer(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
        }
    }
}

impl From<&BigRational> for ScalarText {
    fn from(q: &BigRational) -> Self {
        ScalarText::Text(rational_to_string(q))
    }
}

/// Parses `"p/q"`, an integer, or a decimal with optional exponent.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("invalid rational {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let all = all / 10;
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if shift >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub idx: Vec<usize>,
    pub val: ScalarText,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDocument {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub entries: Vec<EntryDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<ScalarText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl TensorDocument {
    pub fn to_tensor(&self) -> Result<RationalTensor> {
        let default = match &self.default {
            Some(v) => v.parse()?,
            None => BigRational::zero(),
        };
        let mut b = RationalTensor::builder(self.n, self.d)?.default_value(default);
        for e in &self.entries {
            if e.idx.len() != self.d {
                return Err(Error::IndexLength { got: e.idx.len(), expected: self.d });
            }
            if let Some(&bad) = e.idx.iter().find(|&&i| i == 0 || i > self.n) {
                return Err(Error::Parse(format!(
                    "index component {bad} out of range 1..={}",
                    self.n
                )));
            }
            if e.idx.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Parse(format!("index {:?} is not sorted", e.idx)));
            }
            let zero_based: Vec<usize> = e.idx.iter().map(|i| i - 1).collect();
            if b.contains(&zero_based)? {
                return Err(Error::Parse(format!("duplicate index {:?}", e.idx)));
            }
            b.set(&zero_based, e.val.parse()?)?;
        }
        Ok(b.build())
    }

    pub fn from_tensor(a: &RationalTensor, name: Option<String>) -> Self {
        let default = a.default_value();
        TensorDocument {
            n: a.n(),
            d: a.d(),
            entries: a
                .stored_entries()
                .map(|(k, v)| EntryDoc {
                    idx: k.iter().map(|i| i + 1).collect(),
                    val: v.into(),
                })
                .collect(),
            default: (!default.is_zero()).then(|| default.into()),
            name,
            metadata: None,
        }
    }
}

pub fn parse_tensor(text: &str) -> Result<RationalTensor> {
    let doc: TensorDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("tensor document: {e}")))?;
    doc.to_tensor()
}

pub fn emit_tensor(a: &RationalTensor) -> String {
    serde_json::to_string_pretty(&TensorDocument::from_tensor(a, None)).expect("serialisable")
}

/// SHA-256 over `n`, `d` and every canonical entry, so two documents for the
/// same tensor have the same digest however they are written.
pub fn input_digest(a: &RationalTensor) -> String {
    let mut text = format!("n={};d={};", a.n(), a.d());
    for (k, v) in a.iter_canonical() {
        let idx: Vec<String> = k.iter().map(|i| (i + 1).to_string()).collect();
        let _ = write!(text, "{}:{};", idx.join(","), rational_to_string(v));
    }
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NotMember,
    Unknown,
    Copositive,
    NotCopositive,
    StrictlyIndeterminate,
    Pass,
    Fail,
}

impl Verdict {
    /// 0 for a positive answer, 1 for a refutation, 2 when undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Member | Verdict::Copositive | Verdict::Pass => 0,
            Verdict::NotMember | Verdict::NotCopositive | Verdict::Fail => 1,
            Verdict::Unknown | Verdict::StrictlyIndeterminate => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Coef,
    Sos,
    Partition,
    Grid,
    Screen,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    /// Empty for coefficient refutations, where the witness is `θ`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point: Vec<String>,
    pub value: String,
}

impl WitnessDoc {
    pub fn new(point: &[BigRational], value: &BigRational) -> Self {
        WitnessDoc {
            point: point.iter().map(rational_to_string).collect(),
            value: rational_to_string(value),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplices_examined: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplices_pruned: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unresolved: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_checked: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    pub verdict: Verdict,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
    /// Exponent `θ` of a negative expansion coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ExponentVector>,
    #[serde(default)]
    pub stats: StatsDoc,
    pub tool_version: String,
    pub input_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramCertificate>,
}

impl CertificateDocument {
    pub fn new(verdict: Verdict, method: Method, a: &RationalTensor) -> Self {
        CertificateDocument {
            verdict,
            method,
            level: None,
            depth: None,
            witness: None,
            theta: None,
            stats: StatsDoc::default(),
            tool_version: TOOL_VERSION.to_string(),
            input_digest: input_digest(a),
            gram: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("certificate document: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Confirmed(String),
    Rejected(String),
    /// The document makes no checkable claim (undecided verdicts).
    NothingToVerify,
}

fn check_point_witness(a: &RationalTensor, w: &WitnessDoc) -> std::result::Result<String, String> {
    let point = w
        .point
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let claimed = parse_rational(&w.value).map_err(|e| e.to_string())?;
    if point.len() != a.n() {
        return Err(format!("witness has {} coordinates, tensor has n = {}", point.len(), a.n()));
    }
    if point.iter().any(|x| x.is_negative()) {
        return Err("witness leaves the nonnegative orthant".into());
    }
    let value = a.eval(&point).map_err(|e| e.to_string())?;
    if value != claimed {
        return Err(format!("witness value is {}, document claims {}", rational_to_string(&value), w.value));
    }
    if !value.is_negative() {
        return Err("witness value is not negative".into());
    }
    Ok(format!("f(witness) = {} < 0", rational_to_string(&value)))
}

fn confirm(r: std::result::Result<String, String>) -> VerifyOutcome {
    match r {
        Ok(m) => VerifyOutcome::Confirmed(m),
        Err(m) => VerifyOutcome::Rejected(m),
    }
}

/// Re-checks a certificate against its tensor without any state from the run
/// that produced it.
pub fn verify_document(doc: &CertificateDocument, a: &RationalTensor) -> VerifyOutcome {
    if doc.input_digest != input_digest(a) {
        return VerifyOutcome::Rejected("input digest does not match the tensor".into());
    }
    use Method::*;
    use Verdict::*;
    let level = doc.level.unwrap_or(0);
    match (doc.method, doc.verdict) {
        (_, Unknown | StrictlyIndeterminate) => VerifyOutcome::NothingToVerify,
        (Partition | Grid | Screen, NotCopositive | NotMember | Fail) => match &doc.witness {
            Some(w) => confirm(check_point_witness(a, w)),
            None => VerifyOutcome::Rejected("refutation without a witness".into()),
        },
        (Coef, NotMember) => {
            let (Some(theta), Some(w)) = (&doc.theta, &doc.witness) else {
                return VerifyOutcome::Rejected("coefficient refutation without θ and value".into());
            };
            let e = expand_pr(a, level as usize);
            let claimed = match parse_rational(&w.value) {
                Ok(v) => v,
                Err(e) => return VerifyOutcome::Rejected(e.to_string()),
            };
            confirm(match e.get(theta) {
                Some(v) if *v == claimed && v.is_negative() => {
                    Ok(format!("coefficient at {theta} is {}", rational_to_string(v)))
                }
                Some(v) => Err(format!("coefficient at {theta} is {}", rational_to_string(v))),
                None => Err(format!("{theta} is not an exponent of the expansion")),
            })
        }
        (Coef, Member) => confirm(if member_c_r_exact(a, level as usize).is_member() {
            Ok(format!("all coefficients at level {level} are nonnegative"))
        } else {
            Err(format!("a coefficient at level {level} is negative"))
        }),
        (Sos, Member) => {
            let Some(g) = &doc.gram else {
                return VerifyOutcome::Rejected("SOS claim without a Gram certificate".into());
            };
            let c = verify_certificate(a, g, 1e-8, 1e-8);
            confirm(if c.ok {
                Ok(format!("residual {:.3e}, min eigenvalue {:.3e}", c.residual, c.min_eig))
            } else {
                Err(format!("residual {:.3e}, min eigenvalue {:.3e}", c.residual, c.min_eig))
            })
        }
        (Grid, Member) => confirm(match member_o_r(a, level) {
            Ok(m) if m.is_member() => Ok(format!("nonnegative on the level-{level} grid")),
            Ok(_) => Err(format!("negative on the level-{level} grid")),
            Err(e) => Err(e.to_string()),
        }),
        (Screen, Pass) => confirm(if necessary_screen(a).passed() {
            Ok("screen passes".into())
        } else {
            Err("screen fails".into())
        }),
        (Partition, Copositive) => {
            let opts = CertifyOptions {
                max_depth: doc.stats.max_depth.unwrap_or(32),
                simplex_budget: doc.stats.budget.unwrap_or(1_000_000),
                discipline: Discipline::Fifo,
                parallel: true,
            };
            let c = certify_copositivity(a, &opts);
            confirm(if c.verdict == crate::partition::Verdict::Copositive {
                Ok(format!("{} simplices re-examined", c.stats.simplices_examined))
            } else {
                Err(format!("re-run gives {:?}", c.verdict))
            })
        }
        (m, v) => VerifyOutcome::Rejected(format!("verdict {v:?} does not apply to method {m:?}")),
    }
}

/// Distinct 1-based index tuples in a document, for diagnostics.
pub fn document_indices(doc: &TensorDocument) -> BTreeSet<Vec<usize>> {
    doc.entries.iter().map(|e| e.idx.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{nonnegative_quartic, sextic_sos_example};
    use crate::scalar::ratio;

    const EXAMPLE: &str = r#"{
        "n": 3, "d": 4, "default": "5",
        "entries": [
            {"idx": [1,1,1,1], "val": "0"},
            {"idx": [2,2,2,2], "val": "1/1"},
            {"idx": [3,3,3,3], "val": 1}
        ]
    }"#;

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("5").unwrap(), parse_rational("5/1").unwrap());
        assert_eq!(parse_rational("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), ratio(-3, 20));
        assert_eq!(parse_rational("2E2").unwrap(), ratio(200, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        for bad in ["", "1/0", "abc", "1.2.3", "1/", "e5", "--1", "0x10"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn example_document() {
        let a = parse_tensor(EXAMPLE).unwrap();
        assert_eq!(a, nonnegative_quartic());
        assert_eq!(a.iter_canonical().count(), 15);
    }

    #[test]
    fn empty_document_is_zero() {
        let a = parse_tensor(r#"{"n": 2, "d": 2, "entries": []}"#).unwrap();
        assert!(a.iter_canonical().all(|(_, v)| v.is_zero()));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            r#"{"n": 2, "d": 2, "entries": [{"idx": [2,1], "val": "1"}]}"#,
            r#"{"n": 2, "d": 2, "entries": [{"idx": [1,3], "val": "1"}]}"#,
            r#"{"n": 2, "d": 2, "entries": [{"idx": [0,1], "val": "1"}]}"#,
            r#"{"n": 2, "d": 2, "entries": [{"idx": [1,2], "val": "1"}, {"idx": [1,2], "val": "2"}]}"#,
            r#"{"n": 2, "d": 2, "entries": [{"idx": [1,2], "val": "x"}]}"#,
            r#"{"n": 2, "d": 2, "entries": [{"idx": [1,2], "val": 0.5}]}"#,
            r#"{"n": 2, "d": 2, "entries": [{"idx": [1], "val": "1"}]}"#,
            r#"{"n": 0, "d": 2}"#,
            r#"{"n": 2, "d": 2"#,
        ] {
            assert!(parse_tensor(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trip_and_digest() {
        for a in [nonnegative_quartic(), sextic_sos_example()] {
            let b = parse_tensor(&emit_tensor(&a)).unwrap();
            assert_eq!(a, b);
            assert_eq!(input_digest(&a), input_digest(&b));
        }
        // Same tensor written with an explicit entry equal to the default.
        let c = parse_tensor(
            r#"{"n": 3, "d": 4, "default": "5", "entries": [
                {"idx": [1,1,1,1], "val": "0"}, {"idx": [1,1,1,2], "val": "5"},
                {"idx": [2,2,2,2], "val": "1"}, {"idx": [3,3,3,3], "val": "1"}]}"#,
        )
        .unwrap();
        assert_eq!(input_digest(&c), input_digest(&nonnegative_quartic()));
    }

    #[test]
    fn certificate_round_trip_and_verify() {
        let a = crate::examples::matrix(&[[0, -1], [-1, 0]]);
        let mut doc = CertificateDocument::new(Verdict::NotCopositive, Method::Partition, &a);
        doc.witness = Some(WitnessDoc::new(&[ratio(1, 2), ratio(1, 2)], &ratio(-1, 2)));
        doc.depth = Some(1);
        doc.stats.diameter = Some(0.1 + 0.2);
        let back = CertificateDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert!(matches!(verify_document(&back, &a), VerifyOutcome::Confirmed(_)));

        let mut forged = doc.clone();
        forged.witness = Some(WitnessDoc::new(&[ratio(1, 1), ratio(0, 1)], &ratio(-1, 2)));
        assert!(matches!(verify_document(&forged, &a), VerifyOutcome::Rejected(_)));

        let other = crate::examples::matrix(&[[0, -1], [-1, 1]]);
        assert!(matches!(verify_document(&doc, &other), VerifyOutcome::Rejected(_)));
    }
}
