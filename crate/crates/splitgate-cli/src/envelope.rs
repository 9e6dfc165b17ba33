//! Report envelope and canonical JSON rendering.
//!
//! Every subcommand emits exactly one JSON document: an envelope holding
//! the tool version, the subcommand name, the fully resolved flag set, and
//! the result. Rendering is canonical so identical runs are byte-identical:
//! object keys keep insertion order, and every real number carries at least
//! six fractional digits, which also keeps integers and reals visibly
//! distinct.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::CliError;

/// Wrap a result document with full run provenance.
pub fn envelope(subcommand: &str, flags: Value, result: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "flags": flags,
        "result": result,
    })
}

/// Render a real with at least six fractional digits. Magnitudes outside
/// the comfortable decimal range fall back to exponent notation.
fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0.000000".to_string();
    }
    let abs = v.abs();
    if !(1e-6..1e16).contains(&abs) {
        return format!("{v:e}");
    }
    let shortest = format!("{v}");
    match shortest.split_once('.') {
        None => format!("{shortest}.000000"),
        Some((_, frac)) if frac.len() >= 6 => shortest,
        Some((int, frac)) => format!("{int}.{frac:0<6}"),
    }
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_real(n.as_f64().expect("number is one of u64/i64/f64")));
            }
        }
        Value::String(s) => write_string(out, s),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            out.push('\n');
            push_indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(out, depth + 1);
                write_string(out, key);
                out.push_str(": ");
                write_value(out, item, depth + 1);
            }
            out.push('\n');
            push_indent(out, depth);
            out.push('}');
        }
    }
}

/// Canonical pretty rendering with a trailing newline.
pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

/// Write the document to `out`, or standard output when no path is given.
pub fn write_document(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let text = to_canonical_json(value);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::new("io", format!("writing {} failed: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Resolved flag maps preserve declaration order; this helper keeps call
/// sites terse.
pub fn flags_object(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (key, value) in entries {
        map.insert(key.to_string(), value);
    }
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_six_fractional_digits() {
        assert_eq!(format_real(0.0), "0.000000");
        assert_eq!(format_real(-0.0), "0.000000");
        assert_eq!(format_real(1.0), "1.000000");
        assert_eq!(format_real(0.92), "0.920000");
        assert_eq!(format_real(-2.5), "-2.500000");
        assert_eq!(format_real(0.1513671875), "0.1513671875");
        assert_eq!(format_real(1.5e-7), "1.5e-7");
        assert_eq!(format_real(3e21), "3e21");
    }

    #[test]
    fn integers_stay_integers() {
        let doc = json!({"count": 3, "fraction": 0.5});
        let text = to_canonical_json(&doc);
        assert!(text.contains("\"count\": 3"));
        assert!(text.contains("\"fraction\": 0.500000"));
    }

    #[test]
    fn rendering_round_trips() {
        let doc = json!({
            "b": [1, 2.25, "x"],
            "a": {"nested": null, "t": true},
            "empty": [],
        });
        let text = to_canonical_json(&doc);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        // keys stay in insertion order, not sorted
        let b = text.find("\"b\"").unwrap();
        let a = text.find("\"a\"").unwrap();
        assert!(b < a);
    }

    #[test]
    fn envelope_shape_is_stable() {
        let doc = envelope("split", json!({"seed": 1}), json!({"ok": true}));
        let text = to_canonical_json(&doc);
        let version = text.find("\"version\"").unwrap();
        let subcommand = text.find("\"subcommand\"").unwrap();
        let flags = text.find("\"flags\"").unwrap();
        let result = text.find("\"result\"").unwrap();
        assert!(version < subcommand && subcommand < flags && flags < result);
    }
}
