//! Certificate tables for gate, Hadamard, UEB and MPS files.

use std::fmt;

use serde::Serialize;

use crate::biunitary::{
    hadamard_violation, kim_property_violation, ueb_violation, Gate, UnitaryErrorBasis,
};
use crate::error::Result;
use crate::io::ValidationTarget;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationReport {
    pub kind: &'static str,
    pub tol: f64,
    pub checks: Vec<CheckLine>,
    /// Whether the object satisfies the defining property of its kind.
    pub valid: bool,
}

fn line(name: &'static str, violation: f64, tol: f64) -> CheckLine {
    CheckLine {
        name,
        passed: violation <= tol,
        violation,
    }
}

pub fn gate_report(g: &Gate, tol: f64) -> ValidationReport {
    let c = g.certify(tol);
    let checks = vec![
        line("unitary", c.unitary_violation, tol),
        line("dual_unitary", c.dual_violation, tol),
        line("kim_property", kim_property_violation(g), tol),
    ];
    ValidationReport {
        kind: "gate",
        tol,
        valid: checks[0].passed,
        checks,
    }
}

/// `polar` projects a gate onto the unitary (or, if dual-unitary within `polar_tol`,
/// dual-unitary) set before checking.
pub fn validate(
    target: &ValidationTarget,
    tol: f64,
    polar: Option<f64>,
) -> Result<ValidationReport> {
    Ok(match target {
        ValidationTarget::Gate(file) => {
            let mut g = file.to_gate()?;
            if let Some(ptol) = polar {
                g = if g.is_dual_unitary(ptol) {
                    g.dual_unitary_projected(1e-13)?
                } else {
                    g.polar_projected()?
                };
            }
            gate_report(&g, tol)
        }
        ValidationTarget::Hadamard(file) => {
            let v = hadamard_violation(&file.to_matrix()?);
            let checks = vec![line("hadamard", v, tol)];
            ValidationReport {
                kind: "hadamard",
                tol,
                valid: checks[0].passed,
                checks,
            }
        }
        ValidationTarget::Ueb(file) => {
            let members = file.to_members()?;
            let v = ueb_violation(&members);
            let mut checks = vec![line("ueb", v, tol)];
            if v.is_finite() {
                let basis = UnitaryErrorBasis::new(members, f64::INFINITY)?;
                checks.push(line("completeness", basis.completeness_violation(), tol));
            }
            ValidationReport {
                kind: "ueb",
                tol,
                valid: checks.iter().all(|c| c.passed),
                checks,
            }
        }
        ValidationTarget::Mps(file) => {
            let mps = file.to_mps()?;
            let checks = vec![line("solvable", mps.solvability_violation(), tol)];
            ValidationReport {
                kind: "mps",
                tol,
                valid: checks[0].passed,
                checks,
            }
        }
    })
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (tolerance {:e})", self.kind, self.tol)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<14} {:<5} max violation {:.3e}",
                c.name,
                if c.passed { "yes" } else { "no" },
                c.violation
            )?;
        }
        write!(f, "valid: {}", self.valid)
    }
}
