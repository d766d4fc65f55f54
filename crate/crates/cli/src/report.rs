//! Structured run reports: human-readable check lines as the run proceeds,
//! one machine-readable `RESULT {json}` line at the end, and an exit status
//! that reflects the tolerance verdicts — no silent partial success.

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckLine>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub data: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ok: true,
            checks: Vec::new(),
            data: serde_json::Map::new(),
            artifacts: Vec::new(),
        }
    }

    /// Record a residual-vs-tolerance verdict and print its line.
    pub fn check(&mut self, name: &str, residual: f64, tol: f64) -> bool {
        let pass = residual.is_finite() && residual <= tol;
        println!(
            "check {name}: residual {residual:.3e} tol {tol:.1e} {}",
            if pass { "PASS" } else { "FAIL" }
        );
        self.ok &= pass;
        self.checks.push(CheckLine { name: name.to_string(), residual: Some(residual), tol: Some(tol), pass });
        pass
    }

    /// Record a yes/no verdict and print its line.
    pub fn check_bool(&mut self, name: &str, pass: bool) -> bool {
        println!("check {name}: {}", if pass { "PASS" } else { "FAIL" });
        self.ok &= pass;
        self.checks.push(CheckLine { name: name.to_string(), residual: None, tol: None, pass });
        pass
    }

    pub fn datum(&mut self, key: &str, value: serde_json::Value) {
        self.data.insert(key.to_string(), value);
    }

    pub fn artifact(&mut self, path: &std::path::Path) {
        println!("wrote {}", path.display());
        self.artifacts.push(path.display().to_string());
    }

    /// Emit the final `RESULT` line and return the process exit code.
    pub fn finish(self) -> i32 {
        let json = serde_json::to_string(&self).expect("report serializes");
        println!("RESULT {json}");
        if self.ok {
            0
        } else {
            1
        }
    }
}

/// A failure before any checks could run (bad config, I/O, math errors).
pub fn fail_early(command: &str, err: &anyhow::Error) -> i32 {
    eprintln!("error: {err:#}");
    let json = serde_json::json!({
        "command": command,
        "ok": false,
        "error": format!("{err:#}"),
    });
    println!("RESULT {json}");
    2
}
