use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ExperimentConfig;

/// One output row, keyed by column name in column order.
pub type Row = Map<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub runtime_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Everything a run produces. Non-finite numbers are stored as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub meta: Meta,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let columns = self.config.subcommand.columns(self.config.samples.is_some());
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(columns).expect("write to memory");
        for row in &self.rows {
            w.write_record(columns.iter().map(|c| format_cell(row.get(*c))))
                .expect("write to memory");
        }
        w.flush().expect("write to memory");
        String::from_utf8(w.into_inner().expect("write to memory")).expect("csv output is UTF-8")
    }

    pub fn write_to(&self, json: bool, out: &mut impl Write) -> std::io::Result<()> {
        let text = if json { self.to_json() } else { self.to_csv() };
        out.write_all(text.as_bytes())
    }
}

pub(crate) fn num(v: f64) -> Value {
    Value::from(v)
}

fn format_cell(v: Option<&Value>) -> String {
    match v {
        Some(Value::Number(n)) if n.is_f64() => format_g12(n.as_f64().unwrap_or(f64::NAN)),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        _ => "nan".to_string(),
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn format_g12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        let cases = [
            (0.25, "0.25"),
            (1.0, "1"),
            (-8.22624776524337, "-8.22624776524"),
            (1.0 / 3.0, "0.333333333333"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1.5e-7, "1.5e-07"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (5.36639343983e-5, "5.36639343983e-05"),
            (9.9999999999999e-5, "0.0001"),
            (f64::INFINITY, "inf"),
            (-0.0, "0"),
        ];
        for (v, want) in cases {
            assert_eq!(format_g12(v), want, "{v}");
        }
    }
}
