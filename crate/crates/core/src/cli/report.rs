//! Report assembly. JSON objects use sorted keys; non-finite numbers are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`.

use serde_json::{json, Map, Value};

use crate::nyquist::{CurveMargins, MarginReport, SegmentCheck};
use crate::passivity::PassivityClass;
use crate::polyrat::RootSet;
use crate::tfmatrix::{Status, Verdict};
use crate::Tolerances;

pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x.is_infinite() {
        Value::from(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        Value::from(x)
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Inverse of [`num`] for values read back from reports or corpus data.
pub fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

pub fn roots(r: &RootSet) -> Value {
    Value::Array(
        r.iter()
            .map(|r| json!({"re": num(r.z.re), "im": num(r.z.im), "multiplicity": r.multiplicity}))
            .collect(),
    )
}

pub fn verdict(v: &Verdict) -> Value {
    json!({"status": v.status.to_string(), "method": v.method, "witnesses": roots(&v.witness_poles)})
}

pub fn tolerances(t: &Tolerances) -> Value {
    json!({
        "root": num(t.root),
        "cluster": num(t.cluster),
        "marginal": num(t.marginal),
        "pole_guard": num(t.pole_guard),
        "exclusion": num(t.exclusion),
        "indent_radius": num(t.indent_radius),
        "closure": num(t.closure),
        "pr_boundary": num(t.pr_boundary),
    })
}

fn curve_margins(m: &CurveMargins) -> Value {
    json!({"k1": num(m.k1), "k2": num(m.k2), "theta1": num(m.theta1)})
}

pub fn margins(m: &MarginReport) -> Value {
    json!({
        "k1": num(m.k1),
        "k1_zero_limit": m.k1_is_zero_limit(),
        "k2": num(m.k2),
        "theta1": num(m.theta1),
        "per_curve": m.per_curve.iter().map(curve_margins).collect::<Vec<_>>(),
    })
}

pub fn segment(s: &SegmentCheck) -> Value {
    json!({
        "crosses_segment": s.crosses_segment,
        "limit_on_segment": s.limit_on_segment,
        "crossings": s.crossings.iter().map(|x| num(*x)).collect::<Vec<_>>(),
    })
}

pub fn passivity(c: &PassivityClass) -> Value {
    let w = &c.witnesses;
    json!({
        "tier": format!("{:?}", c.tier),
        "failing_pole": w.failing_pole.map_or(Value::Null, |z| json!({"re": num(z.re), "im": num(z.im)})),
        "failing_frequency": opt_num(w.failing_frequency),
        "min_hermitian_eig": num(w.min_hermitian_eig),
        "limit_hermitian_eig": num(w.limit_hermitian_eig),
        "epsilon": opt_num(w.epsilon),
        "delta": opt_num(w.delta),
    })
}

/// Result of running one analysis command.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub fields: Map<String, Value>,
    /// Human-readable lines for standard output.
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(system: &str, command: &str, tol: &Tolerances) -> Self {
        let mut fields = Map::new();
        fields.insert("system".into(), Value::from(system));
        fields.insert("command".into(), Value::from(command));
        fields.insert("tolerances".into(), tolerances(tol));
        Self { fields, lines: vec![format!("{command}: {system}")] }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn set_verdict(&mut self, v: &Verdict) {
        self.line(format!("verdict: {} ({})", v.status, v.method));
        for r in v.witnesses() {
            self.line(format!("  witness {:.10} {:+.10}j  x{}", r.z.re, r.z.im, r.multiplicity));
        }
        self.set("verdict", verdict(v));
    }

    /// Records a second method's verdict and whether it agrees with `reference`.
    /// An Inconclusive verdict agrees with anything.
    pub fn cross_check(&mut self, reference: &Verdict, name: &str, other: crate::Result<Verdict>) {
        let entry = match other {
            Ok(v) => {
                let agrees = v.status == reference.status
                    || v.status == Status::Inconclusive
                    || reference.status == Status::Inconclusive;
                self.line(format!("cross-check {name}: {} ({})", v.status, if agrees { "agrees" } else { "DISAGREES" }));
                json!({"method": name, "status": v.status.to_string(), "agrees": agrees})
            }
            Err(e) => {
                self.line(format!("cross-check {name}: not available ({e})"));
                json!({"method": name, "status": Value::Null, "agrees": Value::Null, "error": e.to_string()})
            }
        };
        let list = self.fields.entry("cross_checks").or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(a) = list {
            a.push(entry);
        }
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.fields.clone())).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}
