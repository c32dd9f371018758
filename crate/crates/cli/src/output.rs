//! JSON and CSV rendering. CSV cells reuse the JSON number formatting, so both
//! formats carry identical numbers.

use serde::Serialize;
use serde_json::Value;

use crate::experiment::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Nested keys joined with `.`; arrays are indexed.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", v, &mut out);
    out
}

fn cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per value, columns in first-seen key order.
pub fn csv_table(rows: &[Value]) -> String {
    let flat: Vec<Vec<(String, String)>> = rows.iter().map(flatten).collect();
    let mut header: Vec<String> = Vec::new();
    for row in &flat {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut out = header.iter().map(|h| cell(h)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in &flat {
        let line: Vec<String> = header
            .iter()
            .map(|h| row.iter().find(|(k, _)| k == h).map_or(String::new(), |(_, v)| cell(v)))
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Any serializable value; CSV puts it on a single flattened row.
pub fn render<T: Serialize>(value: &T, format: Format) -> anyhow::Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&v)?;
            s.push('\n');
            s
        }
        Format::Csv => csv_table(&[v]),
    })
}

/// Experiment results as CSV: records, then verdicts, then aggregates, separated by blank lines.
pub fn render_experiment(result: &ExperimentResult, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => render(result, format),
        Format::Csv => {
            let verdicts = result.verdicts.iter().map(serde_json::to_value).collect::<Result<Vec<_>, _>>()?;
            let aggregates: Vec<Value> = result
                .aggregates
                .iter()
                .map(|(k, v)| serde_json::json!({ "aggregate": k, "value": v }))
                .collect();
            Ok(format!("{}\n{}\n{}", csv_table(&result.records), csv_table(&verdicts), csv_table(&aggregates)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_nested() {
        let v = json!({"a": 1.5, "b": {"c": [1, 2]}, "d": null, "e": "x,y"});
        let f = flatten(&v);
        assert_eq!(
            f,
            vec![
                ("a".into(), "1.5".into()),
                ("b.c.0".into(), "1".into()),
                ("b.c.1".into(), "2".into()),
                ("d".into(), "".into()),
                ("e".into(), "x,y".into()),
            ]
        );
        assert_eq!(csv_table(&[v]), "a,b.c.0,b.c.1,d,e\n1.5,1,2,,\"x,y\"\n");
    }

    #[test]
    fn numbers_match_json() {
        let x = 0.1 + 0.2;
        let json = render(&json!({ "x": x }), Format::Json).unwrap();
        let csv = render(&json!({ "x": x }), Format::Csv).unwrap();
        let token = serde_json::to_string(&x).unwrap();
        assert!(json.contains(&token) && csv.contains(&token));
    }
}
