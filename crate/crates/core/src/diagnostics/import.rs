use serde::{Deserialize, Serialize};

use crate::ebm::{assign_ranks, Term, TermImportance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExternalTermKind {
    Main,
    Pair,
}

/// Minimal importance record for models fitted elsewhere. Pair names use
/// `"a x b"` unless `features` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalTerm {
    pub term: String,
    pub kind: ExternalTermKind,
    pub importance: f64,
    #[serde(default)]
    pub features: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Document {
    Native(Vec<TermImportance>),
    External(Vec<ExternalTerm>),
    Wrapped { importance: Vec<TermImportance> },
    WrappedExternal { importance: Vec<ExternalTerm> },
}

/// Parse a native importance dump, an object carrying an `importance` list, or
/// a list of [`ExternalTerm`] records.
pub fn load_importances(json: &str) -> Result<Vec<TermImportance>> {
    let doc: Document = serde_json::from_str(json)
        .map_err(|e| Error::invalid(format!("unrecognised importance document: {e}")))?;
    match doc {
        Document::Native(v) | Document::Wrapped { importance: v } => Ok(v),
        Document::External(v) | Document::WrappedExternal { importance: v } => from_external(&v),
    }
}

fn from_external(records: &[ExternalTerm]) -> Result<Vec<TermImportance>> {
    let mut ids: Vec<String> = Vec::new();
    let mut id_of = |name: &str| -> usize {
        match ids.iter().position(|n| n == name) {
            Some(k) => k,
            None => {
                ids.push(name.to_string());
                ids.len() - 1
            }
        }
    };
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        if r.importance.is_nan() || r.importance < 0.0 {
            return Err(Error::invalid(format!(
                "term {:?} has a negative or missing importance",
                r.term
            )));
        }
        let features: Vec<String> = match (&r.features, r.kind) {
            (Some(f), _) => f.clone(),
            (None, ExternalTermKind::Main) => vec![r.term.clone()],
            (None, ExternalTermKind::Pair) => {
                r.term.split(" x ").map(|s| s.trim().to_string()).collect()
            }
        };
        let term = match (r.kind, features.as_slice()) {
            (ExternalTermKind::Main, [f]) => Term::Main(id_of(f)),
            (ExternalTermKind::Pair, [a, b]) => {
                let (a, b) = (id_of(a), id_of(b));
                Term::Pair(a.min(b), a.max(b))
            }
            _ => {
                return Err(Error::invalid(format!(
                    "term {:?} does not name the expected number of features",
                    r.term
                )))
            }
        };
        out.push(TermImportance {
            term,
            name: r.term.clone(),
            features,
            importance: r.importance,
            rank: 0,
        });
    }
    assign_ranks(&mut out);
    Ok(out)
}
