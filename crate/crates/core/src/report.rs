//! Run reports: fixed key order, floats with 17 significant digits, `null` for non-finite.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::delta::Classification;
use crate::linalg::AffineMap;
use crate::surface::SurfaceSpec;
use crate::verify::BatteryOutcome;

pub const SCHEMA_VERSION: &str = "1";

/// A float serialized as `{:.16e}`, or `null` when not finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

fn floats(v: impl IntoIterator<Item = f64>) -> Vec<Float> {
    v.into_iter().map(Float).collect()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<Float>> {
    m.row_iter().map(|r| floats(r.iter().copied())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Rejected,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Error => 1,
            Outcome::Rejected => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Ok => "OK",
            Outcome::Rejected => "Rejected",
            Outcome::Error => "Error",
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Named metrics in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics(Vec<(String, f64)>);

impl Diagnostics {
    pub fn push(&mut self, name: &str, value: f64) {
        self.0.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for Diagnostics {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &Float(*v))?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceEcho {
    pub dim: usize,
    pub rho: String,
    pub box_center: Vec<Float>,
    pub box_halfwidth: Float,
}

impl SurfaceEcho {
    pub fn new(spec: &SurfaceSpec) -> Self {
        SurfaceEcho {
            dim: spec.n_plus_1,
            rho: spec.rho.to_string(),
            box_center: floats(spec.box_center().to_reals()),
            box_halfwidth: Float(spec.box_halfwidth()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizerEcho {
    /// Rows of quaternion entries `[t, x, y, z]`.
    pub a: Vec<Vec<[Float; 4]>>,
    pub omega: [Float; 4],
    pub q0: Vec<Float>,
}

impl NormalizerEcho {
    pub fn new(map: &AffineMap) -> Self {
        let n = map.a.rows();
        let a = (0..n).map(|i| (0..n).map(|j| map.a[(i, j)].to_array().map(Float)).collect()).collect();
        NormalizerEcho { a, omega: map.omega.to_array().map(Float), q0: floats(map.q0.to_reals()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationEcho {
    pub label: &'static str,
    pub inertia: [usize; 3],
    pub normalizer: NormalizerEcho,
    pub residual: Float,
}

impl ClassificationEcho {
    pub fn new(c: &Classification) -> Self {
        ClassificationEcho {
            label: c.label.name(),
            inertia: c.inertia.as_array(),
            normalizer: NormalizerEcho::new(&c.normalizer),
            residual: Float(c.residual),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEcho {
    pub name: &'static str,
    pub value: Float,
    pub tol: Float,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatteryEcho {
    pub name: &'static str,
    pub status: &'static str,
    pub worst_residual: Option<Float>,
    pub checks: Vec<CheckEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl BatteryEcho {
    pub fn new(b: &BatteryOutcome) -> Self {
        BatteryEcho {
            name: b.name,
            status: b.status.name(),
            worst_residual: b.worst().map(|c| Float(c.value)),
            checks: b
                .checks
                .iter()
                .map(|c| CheckEcho { name: c.name, value: Float(c.value), tol: Float(c.tol), passed: c.passed() })
                .collect(),
            message: b.message.clone(),
        }
    }
}

/// Pointwise dump for the `frame` command.
#[derive(Clone, Debug, Serialize)]
pub struct FrameEcho {
    pub point: Vec<Float>,
    pub normal: Vec<Float>,
    /// `J_s N`, the vectors representing `eta_hat_s`.
    pub eta_hat: [Vec<Float>; 3],
    pub ii_eigenvalues_h: Vec<Float>,
    pub mu: Float,
    pub f: Float,
    #[serde(rename = "S")]
    pub s: Float,
    pub r: Vec<Float>,
    pub delta: Vec<Vec<Float>>,
}

impl FrameEcho {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        point: &DVector<f64>,
        normal: &DVector<f64>,
        eta_hat: &[DVector<f64>; 3],
        ii_eigenvalues_h: &[f64],
        mu: f64,
        f: f64,
        s: f64,
        r: &DVector<f64>,
        delta: &DMatrix<f64>,
    ) -> Self {
        let vec = |v: &DVector<f64>| floats(v.iter().copied());
        FrameEcho {
            point: vec(point),
            normal: vec(normal),
            eta_hat: [vec(&eta_hat[0]), vec(&eta_hat[1]), vec(&eta_hat[2])],
            ii_eigenvalues_h: floats(ii_eigenvalues_h.iter().copied()),
            mu: Float(mu),
            f: Float(f),
            s: Float(s),
            r: vec(r),
            delta: matrix_rows(delta),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: String,
    pub surface: Option<SurfaceEcho>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationEcho>,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub batteries: Vec<BatteryEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameEcho>,
    /// Defining function in normalized coordinates (`normalize` on polynomial input).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_rho: Option<String>,
    pub points_used: usize,
    pub rng_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Report {
    pub fn new(command: &str, rng_seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            surface: None,
            outcome: Outcome::Ok,
            classification: None,
            diagnostics: Diagnostics::default(),
            batteries: Vec::new(),
            frame: None,
            normalized_rho: None,
            points_used: 0,
            rng_seed,
            message: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: &str| {
            let _ = writeln!(out, "{k:<28} {v}");
        };
        row("command", &self.command);
        if let Some(s) = &self.surface {
            row("dim", &s.dim.to_string());
            row("rho", &s.rho);
        }
        row("outcome", self.outcome.name());
        if let Some(m) = &self.message {
            row("message", m);
        }
        if let Some(c) = &self.classification {
            row("label", c.label);
            row("inertia", &format!("{:?}", c.inertia));
            row("normalization residual", &format!("{:.3e}", c.residual.0));
            row("normalizer q0", &fmt_floats(&c.normalizer.q0));
            for (i, r) in c.normalizer.a.iter().enumerate() {
                let cells: Vec<String> = r.iter().map(|q| fmt_floats(q)).collect();
                row(&format!("normalizer A row {i}"), &cells.join("  "));
            }
        }
        if let Some(f) = &self.frame {
            row("point", &fmt_floats(&f.point));
            row("normal", &fmt_floats(&f.normal));
            for (s, e) in f.eta_hat.iter().enumerate() {
                row(&format!("eta_hat_{} pairs with", s + 1), &fmt_floats(e));
            }
            row("II eigenvalues on H", &fmt_floats(&f.ii_eigenvalues_h));
            row("mu", &format!("{:.10}", f.mu.0));
            row("f", &format!("{:.10}", f.f.0));
            row("S", &format!("{:.10}", f.s.0));
            row("r", &fmt_floats(&f.r));
            for (i, r) in f.delta.iter().enumerate() {
                row(&format!("Delta row {i}"), &fmt_floats(r));
            }
        }
        if let Some(r) = &self.normalized_rho {
            row("normalized rho", r);
        }
        for b in &self.batteries {
            let worst = b.worst_residual.map(|w| format!("{:.3e}", w.0)).unwrap_or_else(|| "-".into());
            row(&format!("battery {}", b.name), &format!("{:<8} worst {worst}", b.status));
            for c in &b.checks {
                let mark = if c.passed { "ok" } else { "FAIL" };
                row(&format!("  {}", c.name), &format!("{:.3e} (tol {:.0e}) {mark}", c.value.0, c.tol.0));
            }
            if let Some(m) = &b.message {
                row("  note", m);
            }
        }
        for (k, v) in self.diagnostics.iter() {
            row(k, &format!("{v:.6e}"));
        }
        row("points used", &self.points_used.to_string());
        row("rng seed", &self.rng_seed.to_string());
        out
    }
}

fn fmt_floats(v: &[Float]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.6}", x.0)).collect();
    format!("[{}]", parts.join(", "))
}
