//! JSON and CSV encodings.
//!
//! Rationals travel as canonical strings: `"0"`, `"2"`, `"-1/3"`. A string
//! is canonical when it has no sign on zero, no `+`, no leading zeros, a
//! denominator above one and a numerator coprime to it.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bipartite::JointEvent;
use crate::decomp::NebitDecomposition;
use crate::error::{Error, Result};
use crate::feas::{FeasibilityResult, LinearFeasibilityProblem};
use crate::mcsim::{Branch, Event, EventTable};
use crate::qcore::{Dist, QuasiMatrix, StochMatrix};
use crate::Rational;

fn parse_digits(s: &str, what: &str, full: &str) -> Result<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("{full:?}: {what} must be decimal digits")));
    }
    if s.len() > 1 && s.starts_with('0') {
        return Err(Error::Parse(format!("{full:?}: {what} has a leading zero")));
    }
    Ok(s.parse().expect("digits"))
}

/// Parse a canonical `num/den` string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (num_s, den_s) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let mut num = parse_digits(num_s, "numerator", s)?;
    let den = match den_s {
        Some(d) => parse_digits(d, "denominator", s)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("{s:?}: zero denominator")));
    }
    if den_s.is_some() && den.is_one() {
        return Err(Error::Parse(format!("{s:?}: not canonical, write it without \"/1\"")));
    }
    if num.is_zero() && (negative || den_s.is_some()) {
        return Err(Error::Parse(format!("{s:?}: not canonical, zero is written \"0\"")));
    }
    let g = num.gcd(&den);
    if !g.is_one() {
        return Err(Error::Parse(format!("{s:?}: not in lowest terms (common factor {g})")));
    }
    if negative {
        num = -num;
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

fn parse_list(values: &[String], context: &str) -> Result<Vec<Rational>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            parse_rational(v).map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("{context} entry {i}: {msg}")),
                other => other,
            })
        })
        .collect()
}

fn format_list(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

/// `{"d": 3, "cols": [[...], ...]}`, column-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub d: usize,
    pub cols: Vec<Vec<String>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &QuasiMatrix<Rational>) -> Self {
        Self {
            d: m.dim(),
            cols: m.columns().map(format_list).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<QuasiMatrix<Rational>> {
        if self.cols.len() != self.d {
            return Err(Error::Parse(format!(
                "matrix declares d = {} but has {} columns",
                self.d,
                self.cols.len()
            )));
        }
        let mut cols = Vec::with_capacity(self.d);
        for (j, c) in self.cols.iter().enumerate() {
            if c.len() != self.d {
                return Err(Error::Parse(format!(
                    "column {j} has {} entries, expected {}",
                    c.len(),
                    self.d
                )));
            }
            cols.push(parse_list(c, &format!("column {j}"))?);
        }
        QuasiMatrix::from_columns(cols)
    }
}

/// `{"entries": ["2/3", "1/3", "0"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistJson {
    pub entries: Vec<String>,
}

impl DistJson {
    pub fn from_dist(p: &Dist<Rational>) -> Self {
        Self {
            entries: format_list(p.entries()),
        }
    }

    pub fn to_dist(&self) -> Result<Dist<Rational>> {
        Dist::new(parse_list(&self.entries, "distribution")?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionJson {
    pub q_plus: String,
    pub q_minus: String,
    pub r: String,
    #[serde(rename = "S_plus")]
    pub s_plus: MatrixJson,
    #[serde(rename = "S_minus")]
    pub s_minus: MatrixJson,
}

impl DecompositionJson {
    pub fn from_decomposition(d: &NebitDecomposition<Rational>) -> Self {
        Self {
            q_plus: format_rational(&d.q_plus),
            q_minus: format_rational(&d.q_minus),
            r: format_rational(&d.r),
            s_plus: MatrixJson::from_matrix(d.s_plus.matrix()),
            s_minus: MatrixJson::from_matrix(d.s_minus.matrix()),
        }
    }

    pub fn to_decomposition(&self) -> Result<NebitDecomposition<Rational>> {
        let q_plus = parse_rational(&self.q_plus)?;
        let q_minus = parse_rational(&self.q_minus)?;
        let r = parse_rational(&self.r)?;
        let s_plus = StochMatrix::new(self.s_plus.to_matrix()?)?;
        let s_minus = StochMatrix::new(self.s_minus.to_matrix()?)?;
        let d = NebitDecomposition::new(q_plus, q_minus, s_plus, s_minus);
        if d.r != r {
            return Err(Error::Parse(format!(
                "r = {r} is inconsistent with q_plus/(q_plus+q_minus) = {}",
                d.r
            )));
        }
        Ok(d)
    }
}

/// Feasibility problem `A·v = c, v ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub rows: Vec<Vec<String>>,
    pub rhs: Vec<String>,
}

impl ProblemJson {
    pub fn from_problem(p: &LinearFeasibilityProblem<Rational>) -> Self {
        Self {
            rows: p.rows().iter().map(|r| format_list(r)).collect(),
            rhs: format_list(p.rhs()),
        }
    }

    pub fn to_problem(&self) -> Result<LinearFeasibilityProblem<Rational>> {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| parse_list(r, &format!("row {i}")))
            .collect::<Result<Vec<_>>>()?;
        LinearFeasibilityProblem::new(rows, parse_list(&self.rhs, "rhs")?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityJson {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

impl FeasibilityJson {
    pub fn from_result(r: &FeasibilityResult<Vec<Rational>>) -> Self {
        match r {
            FeasibilityResult::Feasible(w) => Self {
                status: "feasible".into(),
                witness: Some(format_list(w)),
            },
            FeasibilityResult::Infeasible => Self {
                status: "infeasible".into(),
                witness: None,
            },
        }
    }

    pub fn to_result(&self) -> Result<FeasibilityResult<Vec<Rational>>> {
        match (self.status.as_str(), &self.witness) {
            ("feasible", Some(w)) => Ok(FeasibilityResult::Feasible(parse_list(w, "witness")?)),
            ("infeasible", None) => Ok(FeasibilityResult::Infeasible),
            (s, _) => Err(Error::Parse(format!("unexpected feasibility status {s:?} or witness"))),
        }
    }
}

pub fn matrix_from_json(text: &str) -> Result<QuasiMatrix<Rational>> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
    m.to_matrix()
}

pub fn dist_from_json(text: &str) -> Result<Dist<Rational>> {
    let d: DistJson = serde_json::from_str(text).map_err(|e| Error::Parse(format!("distribution JSON: {e}")))?;
    d.to_dist()
}

pub fn decomposition_from_json(text: &str) -> Result<NebitDecomposition<Rational>> {
    let d: DecompositionJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("decomposition JSON: {e}")))?;
    d.to_decomposition()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("io: {e}"))
}

/// CSV with header `b,x`.
pub fn write_events_csv<W: Write>(events: &[Event], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["b", "x"]).map_err(csv_err)?;
    for e in events {
        w.write_record([e.b.bit().to_string(), e.x.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// CSV with header `b,x,y`.
pub fn write_joint_events_csv<W: Write>(events: &[JointEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["b", "x", "y"]).map_err(csv_err)?;
    for e in events {
        w.write_record([e.b.bit().to_string(), e.x.to_string(), e.y.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<usize>>> {
    let mut r = csv::Reader::from_reader(input);
    let found: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Parse(format!(
            "expected CSV header {:?}, found {:?}",
            header.join(","),
            found.join(",")
        )));
    }
    r.records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec.map_err(csv_err)?;
            rec.iter()
                .map(|f| {
                    f.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("row {}: {f:?} is not an index", line + 1)))
                })
                .collect()
        })
        .collect()
}

fn branch(bit: usize, line: usize) -> Result<Branch> {
    u8::try_from(bit)
        .ok()
        .and_then(Branch::from_bit)
        .ok_or_else(|| Error::Parse(format!("row {}: b must be 0 or 1", line + 1)))
}

pub fn read_events_csv<R: Read>(input: R, dim: usize) -> Result<EventTable> {
    let events = read_rows(input, &["b", "x"])?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Event {
                b: branch(r[0], i)?,
                x: r[1],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EventTable::new(dim, events)
}

pub fn read_joint_events_csv<R: Read>(input: R) -> Result<Vec<JointEvent>> {
    read_rows(input, &["b", "x", "y"])?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(JointEvent {
                b: branch(r[0], i)?,
                x: r[1],
                y: r[2],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::decompose_minimal;
    use crate::qcore::ModelS;
    use crate::Scalar;
    use proptest::prelude::*;

    #[test]
    fn canonical_rationals() {
        assert_eq!(parse_rational("-1/3").unwrap(), Rational::from_fraction(-1, 3));
        assert_eq!(parse_rational("0").unwrap(), Rational::from_int(0));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_int(7));
        for bad in [
            "2/4", "3/1", "-0", "0/5", "+1", "01", "1/03", "1/0", "", "1/", "/3", "a", "1.5", " 1",
        ] {
            assert!(parse_rational(bad).is_err(), "{bad:?} accepted");
        }
        let msg = parse_rational("2/4").unwrap_err().to_string();
        assert!(msg.contains("lowest terms"), "{msg}");
    }

    #[test]
    fn matrix_json_errors_are_precise() {
        let bad_sum = r#"{"d": 2, "cols": [["1", "0"], ["1/2", "1/3"]]}"#;
        assert_eq!(
            matrix_from_json(bad_sum).unwrap_err().to_string(),
            "column 1 sums to 5/6, expected 1"
        );
        let bad_entry = r#"{"d": 2, "cols": [["1", "0"], ["2/4", "1/2"]]}"#;
        let msg = matrix_from_json(bad_entry).unwrap_err().to_string();
        assert!(msg.contains("column 1 entry 0"), "{msg}");
        let short = r#"{"d": 3, "cols": [["1", "0", "0"]]}"#;
        assert!(matrix_from_json(short).unwrap_err().to_string().contains("3"));
    }

    #[test]
    fn dist_json_rejects_non_summing() {
        let msg = dist_from_json(r#"{"entries": ["1/2", "1/3"]}"#)
            .unwrap_err()
            .to_string();
        assert_eq!(msg, "entries sum to 5/6, expected 1");
        let p = dist_from_json(r#"{"entries": ["2/3", "1/3", "0"]}"#).unwrap();
        assert_eq!(p, ModelS::<Rational>::new().extremes[0]);
    }

    #[test]
    fn decomposition_json_roundtrip_and_r_check() {
        let d = decompose_minimal(&ModelS::<Rational>::new().s);
        let json = DecompositionJson::from_decomposition(&d);
        assert_eq!(json.q_plus, "4/3");
        assert_eq!(json.r, "4/5");
        let text = serde_json::to_string(&json).unwrap();
        assert_eq!(decomposition_from_json(&text).unwrap(), d);
        let mut wrong = json;
        wrong.r = "1/2".into();
        assert!(wrong.to_decomposition().is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let events = vec![Event::new(0, 2), Event::new(1, 0)];
        let mut buf = Vec::new();
        write_events_csv(&events, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "b,x\n0,2\n1,0\n");
        assert_eq!(read_events_csv(buf.as_slice(), 3).unwrap().events, events);
        assert!(read_events_csv("b,y\n0,1\n".as_bytes(), 3).is_err());
        assert!(read_events_csv("b,x\n2,1\n".as_bytes(), 3).is_err());

        let joint = vec![JointEvent::new(1, 2, 2)];
        let mut buf = Vec::new();
        write_joint_events_csv(&joint, &mut buf).unwrap();
        assert_eq!(read_joint_events_csv(buf.as_slice()).unwrap(), joint);
    }

    proptest! {
        #[test]
        fn rational_strings_roundtrip(n in -1000i64..1000, d in 1i64..1000) {
            let r = Rational::from_fraction(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }

        #[test]
        fn matrix_json_roundtrip(s in crate::decomp::tests::quasi_matrix(3)) {
            let text = serde_json::to_string(&MatrixJson::from_matrix(&s)).unwrap();
            prop_assert_eq!(matrix_from_json(&text).unwrap(), s);
        }
    }
}
