//! Deterministic emitters. Every float is printed with 17 significant
//! digits so readers can reconstruct the exact value; object keys keep
//! insertion order; lines end with LF.

use orthoweak_core::exact::Route;

/// One JSON node. `Obj` preserves the order fields were pushed in.
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(&'static str, Json)>),
}

/// Fixed-width scientific notation; a valid JSON number. Non-finite values
/// have no JSON spelling and degrade to null.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

impl Json {
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, 0);
        s.push('\n');
        s
    }

    fn write(&self, out: &mut String, depth: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(v) => out.push_str(&float(*v)),
            Json::Str(s) => escape(s, out),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline(out, depth + 1);
                    item.write(out, depth + 1);
                }
                newline(out, depth);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline(out, depth + 1);
                    escape(key, out);
                    out.push_str(": ");
                    value.write(out, depth + 1);
                }
                newline(out, depth);
                out.push('}');
            }
        }
    }
}

fn newline(out: &mut String, depth: usize) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// The single-object document shape shared by every JSON-mode command.
pub fn document(config: Json, results: Json, diagnostics: Json) -> String {
    Json::Obj(vec![("config", config), ("results", results), ("diagnostics", diagnostics)])
        .render()
}

/// Sweep rows in the fixed three-column schema.
pub fn sweep_csv(rows: &[[f64; 3]]) -> String {
    let mut s = String::from("param,expectation,postselection_probability\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", float(r[0]), float(r[1]), float(r[2])));
    }
    s
}

pub fn route_label(route: Route) -> &'static str {
    match route {
        Route::ClosedForm => "closed-form",
        Route::OrthogonalFormula => "orthogonal-limit",
        Route::Oracle => "oracle",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(-0.25), "-2.5000000000000000e-1");
        assert_eq!(float(f64::NAN), "null");
        let parsed: f64 = float(0.1).parse().unwrap();
        assert_eq!(parsed, 0.1);
    }

    #[test]
    fn rendering_is_stable_and_escaped() {
        let doc = Json::Obj(vec![
            ("b", Json::Int(2)),
            ("a", Json::Str("x\"y\\z".into())),
            ("rows", Json::Arr(vec![Json::Num(0.5), Json::Null])),
        ]);
        let text = doc.render();
        assert!(text.contains("\"b\": 2"));
        assert!(text.contains("\"a\": \"x\\\"y\\\\z\""));
        let b = text.find("\"b\"").unwrap();
        let a = text.find("\"a\"").unwrap();
        assert!(b < a, "insertion order must survive rendering");
    }

    #[test]
    fn sweep_schema_is_fixed() {
        let csv = sweep_csv(&[[0.1, 0.2, 0.3]]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("param,expectation,postselection_probability"));
        assert_eq!(csv.matches('\n').count(), 2);
        assert!(!csv.contains('\r'));
    }
}
