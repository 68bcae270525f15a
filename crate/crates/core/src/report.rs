//! Key-value structured text with nested maps and arrays, for report output.

/// A structured report value. Rendering is deterministic: map entries keep
/// insertion order.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    List(Vec<Value>),
    Map(Vec<(String, Value)>),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn is_empty_container(&self) -> bool {
        matches!(self, Value::List(v) if v.is_empty()) || matches!(self, Value::Map(m) if m.is_empty())
    }

    fn render_into(&self, out: &mut String, indent: usize) {
        match self {
            Value::Text(s) => out.push_str(s),
            Value::Int(i) => out.push_str(&i.to_string()),
            Value::Float(x) => out.push_str(&format!("{x}")),
            Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Value::List(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                for (idx, item) in items.iter().enumerate() {
                    if idx > 0 {
                        out.push('\n');
                        out.push_str(&"  ".repeat(indent));
                    }
                    out.push_str("- ");
                    item.render_into(out, indent + 1);
                }
            }
            Value::Map(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                for (idx, (key, value)) in entries.iter().enumerate() {
                    if idx > 0 {
                        out.push('\n');
                        out.push_str(&"  ".repeat(indent));
                    }
                    out.push_str(key);
                    out.push(':');
                    if value.is_empty_container() {
                        out.push(' ');
                        value.render_into(out, indent);
                    } else {
                        match value {
                            Value::List(_) | Value::Map(_) => {
                                out.push('\n');
                                out.push_str(&"  ".repeat(indent + 1));
                                value.render_into(out, indent + 1);
                            }
                            scalar => {
                                out.push(' ');
                                scalar.render_into(out, indent);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_nested_structures() {
        let v = Value::Map(vec![
            ("name".to_string(), Value::text("demo")),
            ("count".to_string(), Value::Int(3)),
            (
                "items".to_string(),
                Value::List(vec![Value::Float(0.5), Value::Bool(true)]),
            ),
            (
                "inner".to_string(),
                Value::Map(vec![("k".to_string(), Value::text("v"))]),
            ),
        ]);
        let text = v.render();
        assert!(text.contains("name: demo"));
        assert!(text.contains("- 0.5"));
        assert!(text.contains("k: v"));
        // floats keep round-trip precision
        let f = Value::Float(0.1 + 0.2);
        assert_eq!(f.render(), "0.30000000000000004");
    }
}
