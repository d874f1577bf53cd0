//! Machine-readable suite reports.
//!
//! Reports are deterministic for a fixed seed and version: cases are sorted
//! by name and every number is printed with 17 significant digits, so two
//! runs (or two implementations) can be diffed byte for byte once the wall
//! time is masked. Emission goes through a small hand-rolled JSON writer;
//! parsing uses plain serde_json.

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub name: String,
    pub status: CaseStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub witness: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite_name: String,
    pub seed: u64,
    pub tool_version: String,
    pub cases: Vec<CaseReport>,
    pub wall_time_ms: f64,
}

/// 17-significant-digit decimal text for a float, stable across platforms.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "\"nan\"".to_owned()
    } else if x > 0.0 {
        format!("{:.16e}", f64::MAX)
    } else {
        format!("{:.16e}", f64::MIN)
    }
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.status == CaseStatus::Pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| c.status == CaseStatus::Fail)
    }

    fn render(&self, wall_time: Option<f64>) -> String {
        let mut out = String::with_capacity(1024);
        out.push_str("{\n");
        out.push_str("  \"suiteName\": ");
        write_json_string(&mut out, &self.suite_name);
        out.push_str(",\n");
        out.push_str(&format!("  \"seed\": {},\n", self.seed));
        out.push_str("  \"toolVersion\": ");
        write_json_string(&mut out, &self.tool_version);
        out.push_str(",\n  \"cases\": [");
        for (k, c) in self.cases.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str("\n    {\"name\": ");
            write_json_string(&mut out, &c.name);
            out.push_str(&format!(
                ", \"status\": \"{}\", \"residual\": {}, \"tolerance\": {}",
                match c.status {
                    CaseStatus::Pass => "pass",
                    CaseStatus::Fail => "fail",
                },
                sig17(c.residual),
                sig17(c.tolerance)
            ));
            if let Some(w) = &c.witness {
                out.push_str(", \"witness\": ");
                out.push_str(&serde_json::to_string(w).expect("witness serializes"));
            }
            out.push('}');
        }
        if !self.cases.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("],\n");
        out.push_str(&format!(
            "  \"wallTimeMs\": {}\n}}\n",
            sig17(wall_time.unwrap_or(self.wall_time_ms))
        ));
        out
    }

    pub fn to_json_string(&self) -> String {
        self.render(None)
    }

    /// JSON with the wall time masked, for determinism comparisons.
    pub fn to_normalized_json_string(&self) -> String {
        self.render(Some(0.0))
    }

    pub fn parse_json(text: &str) -> Result<SuiteReport> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::SpecParse(format!("report parse: {e}")))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<SuiteReport> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::SpecParse("report must be a JSON object".into()))?;
        let get_str = |k: &str| -> Result<String> {
            obj.get(k)
                .and_then(Value::as_str)
                .map(str::to_owned)
                .ok_or_else(|| Error::SpecParse(format!("report field {k} missing")))
        };
        let num = |v: &Value, k: &str| -> Result<f64> {
            v.as_f64().ok_or_else(|| Error::SpecParse(format!("field {k} is not a number")))
        };
        let mut cases = Vec::new();
        for c in obj
            .get("cases")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::SpecParse("report field cases missing".into()))?
        {
            let co = c
                .as_object()
                .ok_or_else(|| Error::SpecParse("case must be an object".into()))?;
            cases.push(CaseReport {
                name: co
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::SpecParse("case name missing".into()))?
                    .to_owned(),
                status: match co.get("status").and_then(Value::as_str) {
                    Some("pass") => CaseStatus::Pass,
                    Some("fail") => CaseStatus::Fail,
                    _ => return Err(Error::SpecParse("case status missing".into())),
                },
                residual: num(
                    co.get("residual")
                        .ok_or_else(|| Error::SpecParse("case residual missing".into()))?,
                    "residual",
                )?,
                tolerance: num(
                    co.get("tolerance")
                        .ok_or_else(|| Error::SpecParse("case tolerance missing".into()))?,
                    "tolerance",
                )?,
                witness: co.get("witness").cloned(),
            });
        }
        Ok(SuiteReport {
            suite_name: get_str("suiteName")?,
            seed: obj
                .get("seed")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::SpecParse("report seed missing".into()))?,
            tool_version: get_str("toolVersion")?,
            cases,
            wall_time_ms: num(
                obj.get("wallTimeMs")
                    .ok_or_else(|| Error::SpecParse("report wallTimeMs missing".into()))?,
                "wallTimeMs",
            )?,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "suite {}  seed {}  version {}  wall {:.1}ms\n",
            self.suite_name, self.seed, self.tool_version, self.wall_time_ms
        );
        for c in &self.cases {
            let status = match c.status {
                CaseStatus::Pass => "PASS",
                CaseStatus::Fail => "FAIL",
            };
            out.push_str(&format!(
                "{status} {:<56} residual {:.3e}  tol {:.1e}\n",
                c.name, c.residual, c.tolerance
            ));
            if c.status == CaseStatus::Fail {
                if let Some(w) = &c.witness {
                    out.push_str(&format!("     witness: {w}\n"));
                }
            }
        }
        let passed = self.cases.iter().filter(|c| c.status == CaseStatus::Pass).count();
        out.push_str(&format!("summary: {passed}/{} passed\n", self.cases.len()));
        out
    }
}

/// Incrementally build a suite report; cases end up sorted by name.
pub struct SuiteBuilder {
    suite_name: String,
    seed: u64,
    cases: Vec<CaseReport>,
    started: std::time::Instant,
}

impl SuiteBuilder {
    pub fn new(suite_name: &str, seed: u64) -> Self {
        SuiteBuilder {
            suite_name: suite_name.to_owned(),
            seed,
            cases: Vec::new(),
            started: std::time::Instant::now(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Record a residual-vs-tolerance case.
    pub fn case(&mut self, name: &str, residual: f64, tolerance: f64, witness: Option<Value>) {
        let status = if residual.is_finite() && residual <= tolerance {
            CaseStatus::Pass
        } else {
            CaseStatus::Fail
        };
        self.cases.push(CaseReport {
            name: name.to_owned(),
            status,
            residual,
            tolerance,
            witness,
        });
    }

    /// Record a yes/no case with an optional witness.
    pub fn check(&mut self, name: &str, ok: bool, witness: Option<Value>) {
        self.cases.push(CaseReport {
            name: name.to_owned(),
            status: if ok { CaseStatus::Pass } else { CaseStatus::Fail },
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            witness,
        });
    }

    pub fn finish(mut self) -> SuiteReport {
        self.cases.sort_by(|a, b| a.name.cmp(&b.name));
        SuiteReport {
            suite_name: self.suite_name,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            cases: self.cases,
            wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
        }
    }
}
