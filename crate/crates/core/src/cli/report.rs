//! Report rows, assertions and their CSV/JSON serializations.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::bodies::{BodyKind, BodySpec};

pub const CSV_HEADER: &str = "estimator_id,body,n,N,seed,value,half_width,bound,extra_json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub estimator_id: String,
    pub body: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub seed: u64,
    pub value: f64,
    pub half_width: Option<f64>,
    pub bound: Option<f64>,
    pub extra: Value,
}

impl Row {
    pub fn new(estimator_id: &str, body: &str, n: usize, count: usize, seed: u64, value: f64) -> Self {
        Row {
            estimator_id: estimator_id.to_string(),
            body: body.to_string(),
            n,
            count,
            seed,
            value,
            half_width: None,
            bound: None,
            extra: Value::Null,
        }
    }

    pub fn half_width(mut self, hw: f64) -> Self {
        self.half_width = Some(hw);
        self
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn maybe_bound(mut self, b: Option<f64>) -> Self {
        self.bound = b;
        self
    }

    pub fn extra(mut self, extra: Value) -> Self {
        self.extra = extra;
        self
    }
}

/// A checked claim with its measured value and threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub id: String,
    /// Stable name of the property being checked.
    pub anchor: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    pub note: String,
}

impl Assertion {
    pub fn new(id: impl Into<String>, anchor: &str, measured: f64, bound: f64, passed: bool) -> Self {
        Assertion { id: id.into(), anchor: anchor.to_string(), measured, bound, passed, note: String::new() }
    }

    /// `measured <= bound`
    pub fn at_most(id: impl Into<String>, anchor: &str, measured: f64, bound: f64) -> Self {
        Self::new(id, anchor, measured, bound, measured <= bound)
    }

    /// `measured >= bound`
    pub fn at_least(id: impl Into<String>, anchor: &str, measured: f64, bound: f64) -> Self {
        Self::new(id, anchor, measured, bound, measured >= bound)
    }

    /// `|measured - target| <= tol`; `bound` records the target.
    pub fn near(id: impl Into<String>, anchor: &str, measured: f64, target: f64, tol: f64) -> Self {
        let mut a = Self::new(id, anchor, measured, target, (measured - target).abs() <= tol);
        a.note = format!("tolerance {tol:?}");
        a
    }

    /// `lo <= measured <= hi`
    pub fn within(id: impl Into<String>, anchor: &str, measured: f64, lo: f64, hi: f64) -> Self {
        let mut a = Self::new(id, anchor, measured, hi, (lo..=hi).contains(&measured));
        a.note = format!("range [{lo:?}, {hi:?}]");
        a
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Everything one suite produced.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub rows: Vec<Row>,
    pub assertions: Vec<Assertion>,
    /// Suite-specific summary for `report.json`.
    pub results: Value,
    /// `(file name, svg document)`
    pub plots: Vec<(String, String)>,
}

impl SuiteOutput {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// CSV label of a body, without its dimension.
pub fn body_label(body: &BodySpec) -> String {
    let scale = if body.scale.iter().all(|s| *s == body.scale[0]) {
        if body.scale[0] == 1.0 { String::new() } else { format!("*{}", body.scale[0]) }
    } else {
        format!("*({})", body.scale.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";"))
    };
    let base = match &body.kind {
        BodyKind::LpBall { p } => format!("lp_ball(p={p})"),
        BodyKind::ProductOfIntervals { half_widths } => {
            format!("product({})", half_widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";"))
        }
        k => k.name().to_string(),
    };
    base + &scale
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Debug gives the shortest round-trip form and switches to exponents for tiny values.
        format!("{x:?}")
    }
}

/// `report.csv` contents. Contains no timestamps, so identical runs give identical bytes.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let extra = if r.extra.is_null() { String::new() } else { r.extra.to_string() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.estimator_id),
            csv_field(&r.body),
            r.n,
            r.count,
            r.seed,
            num(r.value),
            r.half_width.map(num).unwrap_or_default(),
            r.bound.map(num).unwrap_or_default(),
            csv_field(&extra)
        );
    }
    out
}

/// JSON numbers cannot hold non-finite values; store those as strings.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { json!(num(x)) }
}
