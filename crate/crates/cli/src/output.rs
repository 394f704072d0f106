//! Deterministic rendering of reports: sorted keys, floats as `%.12e`.

use serde_json::Value;
use std::fmt::Write;

/// C-style `%.12e`; non-finite values become `null`.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn number(n: &serde_json::Number) -> String {
    match n.as_f64() {
        Some(f) if n.is_f64() => format_float(f),
        _ => n.to_string(),
    }
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad);
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", "  ".repeat(indent));
        }
        Value::Object(o) => {
            out.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", Value::String(k.clone()));
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", "  ".repeat(indent));
        }
    }
}

pub fn to_json(v: &Value) -> String {
    let mut s = String::new();
    write_json(&mut s, v, 0);
    s.push('\n');
    s
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, x)| flatten(&key(k), x, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, rows)),
        Value::Number(n) => rows.push((prefix.to_string(), number(n))),
        Value::String(s) => rows.push((prefix.to_string(), csv_field(s))),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `key,value` rows with dotted paths.
pub fn to_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut s = String::from("key,value\n");
    for (k, x) in rows {
        let _ = writeln!(s, "{},{x}", csv_field(&k));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(format_float(1.0), "1.000000000000e+00");
        assert_eq!(format_float(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(format_float(6.02e123), "6.020000000000e+123");
        assert_eq!(format_float(0.0), "0.000000000000e+00");
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn keys_sorted_and_integers_kept() {
        let v = serde_json::json!({"b": 1, "a": [0.5, "x,y"]});
        assert_eq!(to_json(&v), "{\n  \"a\": [\n    5.000000000000e-01,\n    \"x,y\"\n  ],\n  \"b\": 1\n}\n");
        assert_eq!(to_csv(&v), "key,value\na.0,5.000000000000e-01\na.1,\"x,y\"\nb,1\n");
    }
}
