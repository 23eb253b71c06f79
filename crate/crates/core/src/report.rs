//! Report plumbing: rational-as-string serialization and CSV assembly.
//!
//! CSV output is comma-separated with a header row, UTF-8, LF line endings,
//! fields quoted only when they contain a comma, quote, or newline. Reports
//! carry every quantity both as an exact rational string and as a
//! 12-significant-digit decimal.

use serde::Serializer;

use crate::rational::{format_rational, Rational};

/// `#[serde(serialize_with = "rational_string")]` for exact report fields.
pub fn rational_string<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// Same, for optional fields.
pub fn optional_rational_string<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Some(v) => s.serialize_some(&format_rational(v)),
        None => s.serialize_none(),
    }
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Builds a CSV document from a header and rows.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn csv_quotes_only_when_needed() {
        let doc = csv_document(
            &["a", "b"],
            &[
                vec!["1/2".into(), "x,y".into()],
                vec!["3".into(), "q\"q".into()],
            ],
        );
        assert_eq!(doc, "a,b\n1/2,\"x,y\"\n3,\"q\"\"q\"\n");
    }

    #[test]
    fn serializes_rationals_as_strings() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "rational_string")]
            v: Rational,
        }
        let t = T { v: ratio(-7, 2) };
        assert_eq!(serde_json::to_string(&t).unwrap(), "{\"v\":\"-7/2\"}");
    }
}
