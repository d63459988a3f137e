//! JSON interchange formats.
//!
//! Output is compact with a fixed key order, so serializing a parsed document
//! reproduces the original bytes.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::analysis::BoundPoint;
use crate::pda::{CpdaReport, CpdaScheme, Entry, PdaArray, PdaReport};
use crate::resolvable::{ParallelClassPartition, UserLabel};
use crate::simulator::RoundReport;
use crate::transform::BalancedScheme;
use crate::{Error, Rational, Result};

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Entry::Star => s.serialize_str("*"),
            Entry::Symbol(v) => s.serialize_u32(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EntryVisitor;
        impl Visitor<'_> for EntryVisitor {
            type Value = Entry;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("\"*\" or a positive integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Entry, E> {
                if v == "*" {
                    Ok(Entry::Star)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Entry, E> {
                match u32::try_from(v) {
                    Ok(s) if s >= 1 => Ok(Entry::Symbol(s)),
                    _ => Err(E::invalid_value(de::Unexpected::Unsigned(v), &self)),
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Entry, E> {
                match u64::try_from(v) {
                    Ok(u) => self.visit_u64(u),
                    Err(_) => Err(E::invalid_value(de::Unexpected::Signed(v), &self)),
                }
            }
        }
        d.deserialize_any(EntryVisitor)
    }
}

/// Wire form of a PDA, optionally labelled and with relay designations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdaDocument {
    pub f: usize,
    pub k: usize,
    pub s: u32,
    pub rows: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_of_symbol: Option<Vec<usize>>,
}

impl PdaDocument {
    pub fn from_array(array: &PdaArray) -> Self {
        PdaDocument {
            f: array.num_rows(),
            k: array.num_cols(),
            s: array.symbol_count(),
            rows: array.rows().map(<[Entry]>::to_vec).collect(),
            labels: None,
            relay_of_symbol: None,
        }
    }

    pub fn from_scheme(scheme: &CpdaScheme) -> Self {
        PdaDocument {
            labels: Some(
                scheme
                    .labels
                    .iter()
                    .map(|l| l.elements().to_vec())
                    .collect(),
            ),
            relay_of_symbol: Some(scheme.relay_of_symbol.clone()),
            ..PdaDocument::from_array(&scheme.array)
        }
    }

    /// The array, after checking the declared shape against the rows.
    pub fn array(&self) -> Result<PdaArray> {
        if self.rows.len() != self.f {
            return Err(Error::MalformedArray(format!(
                "declared f={} but found {} rows",
                self.f,
                self.rows.len()
            )));
        }
        if let Some(bad) = self.rows.iter().find(|r| r.len() != self.k) {
            return Err(Error::MalformedArray(format!(
                "declared k={} but a row has {} entries",
                self.k,
                bad.len()
            )));
        }
        PdaArray::new(self.rows.clone(), self.s)
    }

    /// The labelled scheme. Without `relay_of_symbol`, each symbol goes to the
    /// smallest relay shared by its columns.
    pub fn scheme(&self) -> Result<CpdaScheme> {
        let array = self.array()?;
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::LabelMismatch("document has no column labels".into()))?
            .iter()
            .map(|l| UserLabel::new(l.clone()))
            .collect::<Result<Vec<_>>>()?;
        match &self.relay_of_symbol {
            Some(relays) => CpdaScheme::new(array, labels, relays.clone()),
            None => CpdaScheme::with_designated_relays(array, labels),
        }
    }
}

fn to_compact<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("in-memory values always serialize")
}

pub fn pda_to_json(array: &PdaArray) -> String {
    to_compact(&PdaDocument::from_array(array))
}

pub fn scheme_to_json(scheme: &CpdaScheme) -> String {
    to_compact(&PdaDocument::from_scheme(scheme))
}

pub fn parse_document(text: &str) -> Result<PdaDocument> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_pda(text: &str) -> Result<PdaArray> {
    parse_document(text)?.array()
}

/// Parses a labelled PDA; `(h, r)` follow from the labels.
pub fn parse_cpda(text: &str) -> Result<CpdaScheme> {
    parse_document(text)?.scheme()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BalancedDocument {
    h: usize,
    replicas: Vec<PdaDocument>,
}

pub fn balanced_to_json(scheme: &BalancedScheme) -> String {
    to_compact(&BalancedDocument {
        h: scheme.h,
        replicas: scheme
            .replicas
            .iter()
            .map(PdaDocument::from_scheme)
            .collect(),
    })
}

/// Accepts either a balanced document or a single labelled PDA.
pub fn parse_balanced(text: &str) -> Result<BalancedScheme> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("replicas").is_some() {
        let doc: BalancedDocument = serde_json::from_value(value)?;
        let replicas = doc
            .replicas
            .iter()
            .map(PdaDocument::scheme)
            .collect::<Result<Vec<_>>>()?;
        if replicas.is_empty() {
            return Err(Error::MalformedArray(
                "balanced scheme has no replicas".into(),
            ));
        }
        Ok(BalancedScheme { h: doc.h, replicas })
    } else {
        let scheme = serde_json::from_value::<PdaDocument>(value)?.scheme()?;
        let (h, _) = scheme.network();
        Ok(BalancedScheme::single(h, scheme))
    }
}

pub fn partition_to_json(partition: &ParallelClassPartition) -> String {
    let classes: Vec<Vec<Vec<usize>>> = partition
        .classes()
        .iter()
        .map(|c| c.iter().map(|l| l.elements().to_vec()).collect())
        .collect();
    to_compact(&classes)
}

/// Parses a partition; `h` is the largest element present and `r` the block size.
pub fn parse_partition(text: &str) -> Result<ParallelClassPartition> {
    let raw: Vec<Vec<Vec<usize>>> = serde_json::from_str(text)?;
    let classes = raw
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(UserLabel::new)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let first = classes
        .first()
        .and_then(|c| c.first())
        .ok_or_else(|| Error::InvalidPartition("no classes".into()))?;
    let r = first.len();
    let h = classes
        .iter()
        .flatten()
        .filter_map(|l| l.elements().last().copied())
        .max()
        .unwrap_or(0);
    ParallelClassPartition::new(h, r, classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for Fraction {
    fn from(q: Rational) -> Self {
        Fraction {
            num: *q.numer(),
            den: *q.denom(),
        }
    }
}

#[derive(Serialize)]
struct SimReportDocument<'a> {
    all_decoded: bool,
    max_rate: Fraction,
    per_relay_bits: &'a [u64],
    #[serde(rename = "F")]
    f: usize,
    #[serde(rename = "M_over_N")]
    m_over_n: Fraction,
    demands: usize,
    demand_oblivious: bool,
    failures: usize,
}

pub fn sim_report_to_json(report: &RoundReport) -> String {
    to_compact(&SimReportDocument {
        all_decoded: report.all_decoded,
        max_rate: report.max_relay_rate.into(),
        per_relay_bits: &report.per_relay_bits,
        f: report.f_effective,
        m_over_n: report.memory_ratio.into(),
        demands: report.demands_run,
        demand_oblivious: report.demand_oblivious,
        failures: report.failures.len(),
    })
}

#[derive(Serialize)]
struct CheckDocument {
    valid: bool,
    k: usize,
    f: usize,
    z: usize,
    s: u32,
    g: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loads: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    balanced: Option<bool>,
    violations: Vec<String>,
}

impl From<&PdaReport> for CheckDocument {
    fn from(rep: &PdaReport) -> Self {
        CheckDocument {
            valid: rep.is_valid,
            k: rep.k,
            f: rep.f,
            z: rep.z,
            s: rep.s,
            g: rep.g_regular,
            h: None,
            r: None,
            loads: None,
            balanced: None,
            violations: rep.violations.iter().map(ToString::to_string).collect(),
        }
    }
}

pub fn pda_report_to_json(report: &PdaReport) -> String {
    to_compact(&CheckDocument::from(report))
}

pub fn cpda_report_to_json(report: &CpdaReport, h: usize, r: usize) -> String {
    to_compact(&CheckDocument {
        h: Some(h),
        r: Some(r),
        loads: Some(report.loads.clone()),
        balanced: Some(report.balanced),
        ..CheckDocument::from(&report.pda)
    })
}

#[derive(Serialize)]
struct BoundDocument {
    h: usize,
    r: usize,
    n: usize,
    m_over_n: Fraction,
    lower_bound: Fraction,
    t: usize,
    l: usize,
}

pub fn bound_to_json(bound: &BoundPoint) -> String {
    to_compact(&BoundDocument {
        h: bound.h,
        r: bound.r,
        n: bound.n_files,
        m_over_n: bound.memory_ratio.into(),
        lower_bound: bound.lower_bound.into(),
        t: bound.t,
        l: bound.l,
    })
}

#[derive(Serialize)]
struct ErrorDocument<'a> {
    code: &'a str,
    message: String,
    context: &'a str,
}

/// `{"code", "message", "context"}` for an error raised while doing `context`.
pub fn error_to_json(err: &Error, context: &str) -> String {
    to_compact(&ErrorDocument {
        code: err.code(),
        message: err.to_string(),
        context,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cutset_array_b, man_pda, ManParams};
    use crate::resolvable::parallel_classes;

    #[test]
    fn pda_layout() {
        let a = man_pda(ManParams { num_users: 3, t: 1 }).unwrap();
        assert_eq!(
            pda_to_json(&a),
            r#"{"f":3,"k":3,"s":3,"rows":[["*",1,2],[1,"*",3],[2,3,"*"]]}"#
        );
    }

    #[test]
    fn round_trips_are_byte_stable() {
        let b = cutset_array_b(4, 2).unwrap();
        let text = scheme_to_json(&b);
        assert!(text.ends_with(r#""relay_of_symbol":[1,2,3,4]}"#));
        let back = parse_cpda(&text).unwrap();
        assert_eq!(back, b);
        assert_eq!(scheme_to_json(&back), text);

        let p = parallel_classes(6, 3).unwrap();
        let text = partition_to_json(&p);
        assert_eq!(partition_to_json(&parse_partition(&text).unwrap()), text);

        let bal = BalancedScheme::single(4, b);
        let text = balanced_to_json(&bal);
        assert_eq!(parse_balanced(&text).unwrap(), bal);
    }

    #[test]
    fn missing_relays_are_designated() {
        let text = r#"{"f":1,"k":3,"s":1,"rows":[[1,1,"*"]],"labels":[[1,2],[3,4],[1,3]]}"#;
        assert!(matches!(
            parse_cpda(text),
            Err(Error::EmptyIntersection { symbol: 1 })
        ));
        let text =
            r#"{"f":2,"k":3,"s":1,"rows":[[1,"*","*"],["*",1,"*"]],"labels":[[1,2],[1,3],[2,3]]}"#;
        assert_eq!(parse_cpda(text).unwrap().relay_of_symbol, vec![1]);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(
            parse_pda(r#"{"f":2,"k":1,"s":0,"rows":[["*"]]}"#),
            Err(Error::MalformedArray(_))
        ));
        assert!(matches!(
            parse_pda(r#"{"f":1,"k":1,"s":1,"rows":[[0]]}"#),
            Err(Error::Json(_))
        ));
        assert!(matches!(
            parse_pda(r#"{"f":1,"k":1,"s":1,"rows":[["x"]]}"#),
            Err(Error::Json(_))
        ));
        assert!(matches!(
            parse_pda(r#"{"f":1,"k":1,"s":0,"rows":[["*"]],"extra":1}"#),
            Err(Error::Json(_))
        ));
        assert!(parse_pda(r#"{"f":1,"k":1,"s":0,"rows":[["*"]]}"#).is_ok());
    }
}
