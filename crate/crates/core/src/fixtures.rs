//! Bundled gate matrices.

use crate::biunitary::Gate;
use crate::error::{Error, Result};
use crate::io::GateFile;

const FIXTURES: &[(&str, &str)] = &[
    (
        "sample_dual_unitary",
        include_str!("../fixtures/sample_dual_unitary.json"),
    ),
    (
        "sample_unitary",
        include_str!("../fixtures/sample_unitary.json"),
    ),
];

pub fn names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a bundled fixture.
pub fn json(name: &str) -> Result<&'static str> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, j)| *j)
        .ok_or_else(|| Error::Config(format!("unknown fixture \"{name}\"")))
}

pub fn file(name: &str) -> Result<GateFile> {
    Ok(serde_json::from_str(json(name)?)?)
}

/// `(name, description)` for every fixture.
pub fn list() -> Vec<(&'static str, String)> {
    FIXTURES
        .iter()
        .map(|(n, j)| {
            let desc = serde_json::from_str::<GateFile>(j)
                .ok()
                .and_then(|f| f.description)
                .unwrap_or_default();
            (*n, desc)
        })
        .collect()
}

/// The fixture exactly as printed (four decimals, not exactly unitary).
pub fn raw_gate(name: &str) -> Result<Gate> {
    file(name)?.to_gate()
}

/// The fixture projected onto its unitary polar factor. Fixtures that are dual-unitary
/// up to print precision are projected onto the dual-unitary set instead.
pub fn gate(name: &str) -> Result<Gate> {
    let raw = raw_gate(name)?;
    if raw.is_dual_unitary(PRINT_TOL) {
        raw.dual_unitary_projected(1e-13)
    } else {
        raw.polar_projected()
    }
}

/// Rounding tolerance of the printed fixtures.
pub const PRINT_TOL: f64 = 5e-4;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_unitary_fixture() {
        let raw = raw_gate("sample_dual_unitary").unwrap();
        assert!(raw.is_dual_unitary(5e-4));
        assert!(!raw.is_dual_unitary(1e-10));
        let g = gate("sample_dual_unitary").unwrap();
        assert!(g.is_unitary(1e-12));
        assert!(g.is_dual_unitary(1e-10));
        assert!(g.matrix().max_abs_diff(raw.matrix()) < 5e-4);
    }

    #[test]
    fn unitary_fixture_is_not_dual_unitary() {
        let raw = raw_gate("sample_unitary").unwrap();
        assert!(raw.is_unitary(5e-4));
        assert!(!raw.is_dual_unitary(1e-2));
        assert!(!gate("sample_unitary").unwrap().is_dual_unitary(1e-2));
    }

    #[test]
    fn listing() {
        assert_eq!(names(), vec!["sample_dual_unitary", "sample_unitary"]);
        assert!(list().iter().all(|(_, d)| !d.is_empty()));
        assert!(raw_gate("missing").is_err());
    }
}
