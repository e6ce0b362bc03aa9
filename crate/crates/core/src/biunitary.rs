//! Complex Hadamard matrices, unitary error bases and the dual-unitary gates
//! built from them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, ComplexMatrix, C64, DEFAULT_TOL, ONE, ZERO};

/// Largest deviation from `H^dag H = H H^dag = q I` and `|H_ab| = 1`.
pub fn hadamard_violation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() || m.rows() == 0 {
        return f64::INFINITY;
    }
    let modulus = m
        .data()
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    modulus.max(m.unitarity_violation_scaled(m.rows() as f64))
}

pub fn is_complex_hadamard(m: &ComplexMatrix, tol: f64) -> bool {
    hadamard_violation(m) <= tol
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexHadamard {
    matrix: ComplexMatrix,
}

impl ComplexHadamard {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let v = hadamard_violation(&matrix);
        if v > tol {
            return Err(Error::InvalidHadamard(v));
        }
        Ok(Self { matrix })
    }

    /// Fourier matrix `K_ab = exp(2 pi i a b / q)`, indices from 0.
    pub fn fourier(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidDimension(format!(
                "Fourier matrix needs q >= 2, got {q}"
            )));
        }
        let matrix = ComplexMatrix::from_fn(q, q, |a, b| {
            C64::from_polar(1.0, 2.0 * PI * ((a * b) % q) as f64 / q as f64)
        });
        Ok(Self { matrix })
    }

    /// Entrywise phase matrix `exp(i phases[a][b])`, validated.
    pub fn from_phases(phases: &[Vec<f64>], tol: f64) -> Result<Self> {
        let q = phases.len();
        if phases.iter().any(|row| row.len() != q) {
            return Err(Error::Shape("phase table must be square".into()));
        }
        Self::new(
            ComplexMatrix::from_fn(q, q, |a, b| C64::from_polar(1.0, phases[a][b])),
            tol,
        )
    }

    pub fn q(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            matrix: self.matrix.conj(),
        }
    }
}

/// Largest deviation of `members` from being a unitary error basis of `q x q` matrices.
pub fn ueb_violation(members: &[ComplexMatrix]) -> f64 {
    let Some(first) = members.first() else {
        return f64::INFINITY;
    };
    let q = first.rows();
    if members.len() != q * q || members.iter().any(|m| m.rows() != q || m.cols() != q) {
        return f64::INFINITY;
    }
    let mut worst = members
        .iter()
        .map(|m| m.unitarity_violation())
        .fold(0.0, f64::max);
    for (i, a) in members.iter().enumerate() {
        for (j, b) in members.iter().enumerate() {
            let overlap: C64 = a
                .data()
                .iter()
                .zip(b.data())
                .map(|(x, y)| x.conj() * y)
                .sum();
            let target = if i == j { q as f64 } else { 0.0 };
            worst = worst.max((overlap - target).norm());
        }
    }
    worst
}

pub fn is_ueb(members: &[ComplexMatrix], tol: f64) -> bool {
    ueb_violation(members) <= tol
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryErrorBasis {
    members: Vec<ComplexMatrix>,
}

impl UnitaryErrorBasis {
    pub fn new(members: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let v = ueb_violation(&members);
        if v > tol {
            return Err(Error::InvalidUeb(v));
        }
        Ok(Self { members })
    }

    /// Shift-and-clock basis `X^j Z^k`, member index `j q + k`.
    pub fn generalized_pauli(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidDimension(format!(
                "unitary error basis needs q >= 2, got {q}"
            )));
        }
        let omega = |n: usize| C64::from_polar(1.0, 2.0 * PI * (n % q) as f64 / q as f64);
        let mut members = Vec::with_capacity(q * q);
        for j in 0..q {
            for k in 0..q {
                // (X^j Z^k)_{ab} = delta_{a, b+j} omega^{k b}
                members.push(ComplexMatrix::from_fn(q, q, |a, b| {
                    if a == (b + j) % q {
                        omega(k * b)
                    } else {
                        ZERO
                    }
                }));
            }
        }
        Ok(Self { members })
    }

    /// The Pauli matrices `{I, X, Y, Z}`.
    pub fn pauli() -> Self {
        Self {
            members: vec![ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()],
        }
    }

    pub fn q(&self) -> usize {
        self.members[0].rows()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ComplexMatrix] {
        &self.members
    }

    pub fn member(&self, n: usize) -> &ComplexMatrix {
        &self.members[n]
    }

    /// Multiplies every member by a phase `exp(i phases[n])`; the result is again a basis.
    pub fn dressed(&self, phases: &[f64]) -> Self {
        Self {
            members: self
                .members
                .iter()
                .zip(phases.iter().chain(std::iter::repeat(&0.0)))
                .map(|(m, &p)| m.scale(C64::from_polar(1.0, p)))
                .collect(),
        }
    }

    /// Max deviation from `sum_n (a_n)_{ab} (a_n^dag)_{cd} = q delta_ad delta_bc`.
    pub fn completeness_violation(&self) -> f64 {
        let q = self.q();
        let mut worst: f64 = 0.0;
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    for d in 0..q {
                        let s: C64 = self
                            .members
                            .iter()
                            .map(|m| m[(a, b)] * m[(d, c)].conj())
                            .sum();
                        let target = if a == d && b == c { q as f64 } else { 0.0 };
                        worst = worst.max((s - target).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Results of re-verifying a gate's defining identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificates {
    pub unitary: bool,
    pub dual_unitary: bool,
    pub kim_property: bool,
    pub unitary_violation: f64,
    pub dual_violation: f64,
    pub kim_violation: f64,
}

/// Two-site gate `U_{ab,cd}` with outputs `(a, b)` and inputs `(c, d)`; the
/// matrix row is `a q + b` and the column `c q + d`.
#[derive(Clone, Debug)]
pub struct Gate {
    q: usize,
    matrix: ComplexMatrix,
    certificates: Certificates,
}

impl PartialEq for Gate {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Gate {
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.rows();
        let q = (n as f64).sqrt().round() as usize;
        if !matrix.is_square() || q * q != n || q == 0 {
            return Err(Error::Shape(format!(
                "gate matrix must be q^2 x q^2, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let certificates = certify(q, &matrix, DEFAULT_TOL);
        Ok(Self {
            q,
            matrix,
            certificates,
        })
    }

    pub fn from_fn(q: usize, mut f: impl FnMut(usize, usize, usize, usize) -> C64) -> Self {
        let matrix = ComplexMatrix::from_fn(q * q, q * q, |r, c| f(r / q, r % q, c / q, c % q));
        let certificates = certify(q, &matrix, DEFAULT_TOL);
        Self {
            q,
            matrix,
            certificates,
        }
    }

    pub fn identity(q: usize) -> Self {
        Self::from_fn(q, |a, b, c, d| if a == c && b == d { ONE } else { ZERO })
    }

    pub fn swap(q: usize) -> Self {
        Self::from_fn(q, |a, b, c, d| if a == d && b == c { ONE } else { ZERO })
    }

    /// Haar-random two-site unitary.
    pub fn haar_random(q: usize, seed: u64) -> Result<Self> {
        Self::from_matrix(crate::linalg::haar_unitary(q * q, seed)?)
    }

    /// Local dimension of one site.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        let q = self.q;
        self.matrix.data()[(a * q + b) * q * q + c * q + d]
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certificates
    }

    /// Recomputes the certificates at a custom tolerance.
    pub fn certify(&self, tol: f64) -> Certificates {
        certify(self.q, &self.matrix, tol)
    }

    /// Reshuffled gate `U~_{ab,cd} = U_{db,ca}`.
    pub fn dual(&self) -> Gate {
        Gate::from_fn(self.q, |a, b, c, d| self.entry(d, b, c, a))
    }

    /// Replaces the matrix by its unitary polar factor.
    pub fn polar_projected(&self) -> Result<Gate> {
        Gate::from_matrix(crate::linalg::closest_unitary(&self.matrix)?)
    }

    /// Alternates polar projections of the gate and of its dual until both are unitary within `tol`.
    pub fn dual_unitary_projected(&self, tol: f64) -> Result<Gate> {
        let q = self.q;
        let mut m = crate::linalg::closest_unitary(&self.matrix)?;
        for _ in 0..500 {
            if dual_violation(q, &m) <= tol && m.unitarity_violation() <= tol {
                return Gate::from_matrix(m);
            }
            let d = crate::linalg::closest_unitary(&dual_matrix(q, &m))?;
            m = crate::linalg::closest_unitary(&dual_matrix(q, &d))?;
        }
        Err(Error::NoConvergence)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.matrix.unitarity_violation() <= tol
    }

    pub fn is_dual_unitary(&self, tol: f64) -> bool {
        dual_violation(self.q, &self.matrix) <= tol
    }
}

fn dual_matrix(q: usize, m: &ComplexMatrix) -> ComplexMatrix {
    let at = |a: usize, b: usize, c: usize, d: usize| m[(a * q + b, c * q + d)];
    ComplexMatrix::from_fn(q * q, q * q, |r, c| at(c % q, r % q, c / q, r / q))
}

fn dual_violation(q: usize, m: &ComplexMatrix) -> f64 {
    dual_matrix(q, m).unitarity_violation()
}

/// Max deviation of `M_{cd} = U_{z0 z1, cd}` from `M^dag M = M M^dag = I/q` over all `(z0, z1)`.
fn kim_violation(q: usize, m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for z in 0..q * q {
        let block = ComplexMatrix::from_fn(q, q, |c, d| m[(z, c * q + d)]);
        worst = worst.max(block.unitarity_violation_scaled(1.0 / q as f64));
    }
    worst
}

/// Same identity for fixed inputs: `N_{ab} = U_{ab, z0 z1}`.
fn kim_input_violation(q: usize, m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for z in 0..q * q {
        let block = ComplexMatrix::from_fn(q, q, |a, b| m[(a * q + b, z)]);
        worst = worst.max(block.unitarity_violation_scaled(1.0 / q as f64));
    }
    worst
}

fn certify(q: usize, m: &ComplexMatrix, tol: f64) -> Certificates {
    let unitary_violation = m.unitarity_violation();
    let dual_violation = dual_violation(q, m);
    let kim_violation = kim_violation(q, m);
    Certificates {
        unitary: unitary_violation <= tol,
        dual_unitary: dual_violation <= tol,
        kim_property: kim_violation <= tol,
        unitary_violation,
        dual_violation,
        kim_violation,
    }
}

pub fn dual(g: &Gate) -> Gate {
    g.dual()
}

pub fn is_dual_unitary(g: &Gate, tol: f64) -> bool {
    g.is_dual_unitary(tol)
}

/// Checks `sum_c U_{z0z1,cb} U*_{z0z1,ca} = sum_c U_{z0z1,bc} U*_{z0z1,ac} = delta_ab / q`
/// for every fixed output pair `(z0, z1)`.
pub fn check_kim_property(g: &Gate, tol: f64) -> bool {
    kim_violation(g.q, &g.matrix) <= tol
}

pub fn kim_property_violation(g: &Gate) -> f64 {
    kim_violation(g.q, &g.matrix)
}

/// The analogous identity with the inputs fixed: every computational product
/// input is mapped to a maximally entangled pair.
pub fn check_kim_property_inputs(g: &Gate, tol: f64) -> bool {
    kim_input_violation(g.q, &g.matrix) <= tol
}

/// `U_{ab,cd} = E_ab F_bd G_dc H_ca exp(i(h1[a] + h2[b])/2) / q`.
pub fn hadamard_gate(
    e: &ComplexHadamard,
    f: &ComplexHadamard,
    g: &ComplexHadamard,
    h: &ComplexHadamard,
    h1: &[f64],
    h2: &[f64],
) -> Result<Gate> {
    let q = e.q();
    if [f.q(), g.q(), h.q(), h1.len(), h2.len()]
        .iter()
        .any(|&n| n != q)
    {
        return Err(Error::Shape(
            "Hadamard gate inputs must share the dimension q".into(),
        ));
    }
    for m in [e, f, g, h] {
        let v = hadamard_violation(m.matrix());
        if v > DEFAULT_TOL {
            return Err(Error::InvalidHadamard(v));
        }
    }
    let (e, f, g, h) = (e.matrix(), f.matrix(), g.matrix(), h.matrix());
    Ok(Gate::from_fn(q, |a, b, c, d| {
        e[(a, b)] * f[(b, d)] * g[(d, c)] * h[(c, a)] * C64::from_polar(1.0, 0.5 * (h1[a] + h2[b]))
            / q as f64
    }))
}

/// Kicked Ising gate `I (K x K) I` with `I = exp(i J Z1 Z2 + i (h1 Z1 + h2 Z2)/2)`
/// and `K = exp(i b X)`.
pub fn kim_gate(j: f64, b: f64, h1: f64, h2: f64) -> Gate {
    let z = |s: usize| if s == 0 { 1.0 } else { -1.0 };
    let ising = |a: usize, bb: usize| {
        C64::from_polar(1.0, j * z(a) * z(bb) + 0.5 * (h1 * z(a) + h2 * z(bb)))
    };
    let kick = |a: usize, c: usize| {
        if a == c {
            C64::new(b.cos(), 0.0)
        } else {
            C64::new(0.0, b.sin())
        }
    };
    Gate::from_fn(2, |a, bb, c, d| {
        ising(a, bb) * kick(a, c) * kick(bb, d) * ising(c, d)
    })
}

/// Cat-map gate `exp[(2 pi i / q)(ab + cd + ac - bd)] / q`.
pub fn cat_map_gate(q: usize) -> Result<Gate> {
    if q < 2 {
        return Err(Error::InvalidDimension(format!(
            "cat map needs q >= 2, got {q}"
        )));
    }
    Ok(Gate::from_fn(q, |a, b, c, d| {
        let n = (a * b + c * d + a * c + (q - 1) * b * d) % q;
        C64::from_polar(1.0, 2.0 * PI * n as f64 / q as f64) / q as f64
    }))
}

/// Gate on local dimension `q^2` built from four unitary error bases, with the
/// site index split as `a = a1 q + a2`:
/// `U_{ab,cd} = (1/q) sum_n (E_n)_{a2 b1} (F_n)_{b2 d2} (G_n)_{d1 c2} (H_n)_{c1 a1}`.
pub fn ueb_gate(
    e: &UnitaryErrorBasis,
    f: &UnitaryErrorBasis,
    g: &UnitaryErrorBasis,
    h: &UnitaryErrorBasis,
) -> Result<Gate> {
    let q = e.q();
    if [f.q(), g.q(), h.q()].iter().any(|&n| n != q) {
        return Err(Error::Shape("unitary error bases must share q".into()));
    }
    let n_members = q * q;
    Ok(Gate::from_fn(q * q, |a, b, c, d| {
        let (a1, a2, b1, b2) = (a / q, a % q, b / q, b % q);
        let (c1, c2, d1, d2) = (c / q, c % q, d / q, d % q);
        let s: C64 = (0..n_members)
            .map(|n| {
                e.member(n)[(a2, b1)]
                    * f.member(n)[(b2, d2)]
                    * g.member(n)[(d1, c2)]
                    * h.member(n)[(c1, a1)]
            })
            .sum();
        s / q as f64
    }))
}

/// Checks that conjugation by a two-qubit gate maps every Pauli string to a
/// single Pauli string times a phase in `{+-1, +-i}`.
pub fn is_clifford(g: &Gate, tol: f64) -> bool {
    if g.q() != 2 {
        return false;
    }
    let singles = [ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
    let strings: Vec<ComplexMatrix> = singles
        .iter()
        .flat_map(|a| singles.iter().map(move |b| a.kron(b)))
        .collect();
    let u = g.matrix();
    let ud = u.adjoint();
    for p in &strings {
        let conj = &(u * p) * &ud;
        let mut hits = 0;
        for s in &strings {
            let overlap: C64 = s
                .data()
                .iter()
                .zip(conj.data())
                .map(|(x, y)| x.conj() * y)
                .sum::<C64>()
                / 4.0;
            let r = overlap.norm();
            if (r - 1.0).abs() <= tol {
                let on_axis = overlap.re.abs().min(overlap.im.abs()) <= tol;
                if !on_axis {
                    return false;
                }
                hits += 1;
            } else if r > tol {
                return false;
            }
        }
        if hits != 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use std::f64::consts::FRAC_PI_4;

    fn fourier(q: usize) -> ComplexHadamard {
        ComplexHadamard::fourier(q).unwrap()
    }

    #[test]
    fn fourier_two_is_the_sign_matrix() {
        let k = fourier(2);
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]);
        assert!(k.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(ComplexHadamard::fourier(1).is_err());
    }

    #[test]
    fn fourier_matrices_are_hadamard() {
        for q in [2, 3, 4, 5, 7] {
            let k = fourier(q);
            assert!(is_complex_hadamard(k.matrix(), 1e-12), "q = {q}");
            let kk = k.matrix() * &k.matrix().adjoint();
            let target = ComplexMatrix::identity(q).scale(C64::new(q as f64, 0.0));
            assert!(kk.max_abs_diff(&target) < 1e-12);
        }
        assert!(fourier(3)
            .matrix()
            .data()
            .iter()
            .all(|z| (z.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn non_hadamard_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            ComplexHadamard::new(m, 1e-10),
            Err(Error::InvalidHadamard(_))
        ));
        assert!(!is_complex_hadamard(&ComplexMatrix::identity(2), 1e-10));
    }

    #[test]
    fn pauli_and_clock_bases() {
        assert!(is_ueb(UnitaryErrorBasis::pauli().members(), 1e-14));
        let b2 = UnitaryErrorBasis::generalized_pauli(2).unwrap();
        assert_eq!(b2.len(), 4);
        assert!(is_ueb(b2.members(), 1e-12));
        let b3 = UnitaryErrorBasis::generalized_pauli(3).unwrap();
        let gram = ComplexMatrix::from_fn(9, 9, |i, j| {
            b3.member(i)
                .data()
                .iter()
                .zip(b3.member(j).data())
                .map(|(x, y)| x.conj() * y)
                .sum()
        });
        let target = ComplexMatrix::identity(9).scale(C64::new(3.0, 0.0));
        assert!(gram.max_abs_diff(&target) < 1e-12);
        for q in [2, 3, 4] {
            let b = UnitaryErrorBasis::generalized_pauli(q).unwrap();
            assert!(b.completeness_violation() < 1e-10);
        }
        assert!(UnitaryErrorBasis::new(vec![ComplexMatrix::identity(2); 4], 1e-10).is_err());
    }

    #[test]
    fn qubit_clock_basis_matches_paulis_up_to_phase() {
        let b = UnitaryErrorBasis::generalized_pauli(2).unwrap();
        for (m, p) in
            b.members()
                .iter()
                .zip([ComplexMatrix::identity(2), pauli_z(), pauli_x(), pauli_y()])
        {
            let overlap: C64 = p
                .data()
                .iter()
                .zip(m.data())
                .map(|(x, y)| x.conj() * y)
                .sum::<C64>()
                / 2.0;
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_is_dual_unitary_identity_is_not() {
        assert!(Gate::swap(2).is_dual_unitary(1e-12));
        assert!(Gate::swap(3).is_dual_unitary(1e-12));
        assert!(!Gate::identity(2).is_dual_unitary(1e-3));
        assert_eq!(Gate::swap(3).dual(), Gate::swap(3));
    }

    #[test]
    fn dual_is_an_involution() {
        for seed in 0..5 {
            let g = Gate::haar_random(3, seed).unwrap();
            assert_eq!(g.dual().dual(), g);
        }
    }

    #[test]
    fn dual_of_hadamard_gate_uses_transposes() {
        let k = fourier(3);
        let e = k.clone();
        let f = k.conj();
        let row = [0.0, 0.2, 0.7];
        let col = [0.0, 0.3, 1.1];
        let phases: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                (0..3)
                    .map(|b| row[a] + col[b] + 2.0 * PI * (a * b) as f64 / 3.0)
                    .collect()
            })
            .collect();
        let g = ComplexHadamard::from_phases(&phases, 1e-10).unwrap();
        let h = k.transpose();
        let zeros = vec![0.0; 3];
        let u = hadamard_gate(&e, &f, &g, &h, &zeros, &zeros).unwrap();
        let ut = hadamard_gate(
            &f.transpose(),
            &e.transpose(),
            &h.transpose(),
            &g.transpose(),
            &zeros,
            &zeros,
        )
        .unwrap();
        assert!(u.dual().matrix().max_abs_diff(ut.matrix()) < 1e-14);
    }

    #[test]
    fn hadamard_gates_carry_all_certificates() {
        for q in [2, 3, 5] {
            let k = fourier(q);
            let h1: Vec<f64> = (0..q).map(|i| 0.37 * i as f64).collect();
            let h2: Vec<f64> = (0..q).map(|i| 1.0 - 0.21 * (i * i) as f64).collect();
            let u = hadamard_gate(&k, &k, &k, &k, &h1, &h2).unwrap();
            let c = u.certificates();
            assert!(
                c.unitary && c.dual_unitary && c.kim_property,
                "q = {q}: {c:?}"
            );
            assert!(check_kim_property_inputs(&u, 1e-10));
        }
    }

    #[test]
    fn hadamard_gate_rejects_bad_input() {
        let k = fourier(2);
        let bad = ComplexHadamard {
            matrix: ComplexMatrix::identity(2),
        };
        assert!(matches!(
            hadamard_gate(&k, &k, &k, &bad, &[0.0; 2], &[0.0; 2]),
            Err(Error::InvalidHadamard(_))
        ));
        let k3 = fourier(3);
        assert!(matches!(
            hadamard_gate(&k, &k3, &k, &k, &[0.0; 2], &[0.0; 2]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn kim_gate_dual_unitarity() {
        let u = kim_gate(FRAC_PI_4, FRAC_PI_4, 0.5, 0.5);
        let c = u.certificates();
        assert!(c.unitary && c.dual_unitary && c.kim_property);
        assert!(check_kim_property_inputs(&u, 1e-10));
        assert!(!kim_gate(0.3, FRAC_PI_4, 0.5, 0.5).is_dual_unitary(1e-6));
        assert!(!kim_gate(FRAC_PI_4, 0.3, 0.0, 0.0).is_dual_unitary(1e-6));
        assert!(kim_gate(-FRAC_PI_4, FRAC_PI_4, 0.1, -0.4).is_dual_unitary(1e-10));
    }

    #[test]
    fn kim_gate_is_clifford_only_at_zero_field() {
        assert!(is_clifford(
            &kim_gate(FRAC_PI_4, FRAC_PI_4, 0.0, 0.0),
            1e-10
        ));
        assert!(!is_clifford(
            &kim_gate(FRAC_PI_4, FRAC_PI_4, 0.5, 0.5),
            1e-10
        ));
        assert!(is_clifford(&Gate::swap(2), 1e-10));
    }

    #[test]
    fn cat_map_equals_hadamard_construction() {
        for q in [2, 3, 5] {
            let k = fourier(q);
            let zeros = vec![0.0; q];
            let reference = hadamard_gate(&k, &k.conj(), &k, &k, &zeros, &zeros).unwrap();
            let cat = cat_map_gate(q).unwrap();
            assert!(cat.matrix().max_abs_diff(reference.matrix()) < 1e-12);
            let c = cat.certificates();
            assert!(c.unitary && c.dual_unitary && c.kim_property);
        }
    }

    #[test]
    fn kim_property_fails_for_swap_and_generic_gates() {
        assert!(!check_kim_property(&Gate::swap(2), 1e-6));
        assert!(!check_kim_property(
            &Gate::haar_random(2, 11).unwrap(),
            1e-6
        ));
    }

    #[test]
    fn ueb_gates_are_dual_unitary() {
        let p = UnitaryErrorBasis::pauli();
        let u = ueb_gate(&p, &p, &p, &p).unwrap();
        assert_eq!(u.q(), 4);
        assert!(u.is_unitary(1e-12));
        assert!(u.is_dual_unitary(1e-12));
        let dressed = p.dressed(&[0.3, 1.2, -0.7, 2.0]);
        let clock = UnitaryErrorBasis::generalized_pauli(2).unwrap();
        let mixed = ueb_gate(&p, &dressed, &clock, &p).unwrap();
        assert!(mixed.is_unitary(1e-10) && mixed.is_dual_unitary(1e-10));
        let c3 = UnitaryErrorBasis::generalized_pauli(3).unwrap();
        assert!(ueb_gate(&c3, &c3, &c3, &c3).unwrap().is_dual_unitary(1e-10));
    }

    /// One-site reduced state of `U |z0 z1>` obtained by explicit partial trace.
    fn one_site_rdm(u: &Gate, z0: usize, z1: usize) -> ComplexMatrix {
        let q = u.q();
        let col = z0 * q + z1;
        ComplexMatrix::from_fn(q, q, |a, a2| {
            (0..q)
                .map(|b| u.matrix()[(a * q + b, col)] * u.matrix()[(a2 * q + b, col)].conj())
                .sum()
        })
    }

    #[test]
    fn hadamard_gates_maximally_entangle_product_states() {
        let k = fourier(3);
        let u = hadamard_gate(
            &k,
            &k.conj(),
            &k.transpose(),
            &k,
            &[0.1, 0.5, 0.9],
            &[0.0, 1.0, 2.0],
        )
        .unwrap();
        let target = ComplexMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
        for z0 in 0..3 {
            for z1 in 0..3 {
                assert!(one_site_rdm(&u, z0, z1).max_abs_diff(&target) < 1e-10);
            }
        }
    }

    #[test]
    fn polar_projection_is_idempotent_on_unitaries() {
        let g = Gate::from_matrix(haar_unitary(4, 3).unwrap()).unwrap();
        assert!(
            g.polar_projected()
                .unwrap()
                .matrix()
                .max_abs_diff(g.matrix())
                < 1e-12
        );
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn phased(q: usize, phases: &[f64]) -> ComplexHadamard {
        // Fourier matrix dressed by row and column phases stays Hadamard.
        let k = ComplexHadamard::fourier(q).unwrap();
        let m = ComplexMatrix::from_fn(q, q, |a, b| {
            k.matrix()[(a, b)] * C64::from_polar(1.0, phases[a] + phases[q + b])
        });
        ComplexHadamard::new(m, 1e-10).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn dressed_hadamard_gates_are_certified(
            q in 2usize..5,
            phases in proptest::collection::vec(-3.2f64..3.2, 24),
        ) {
            let e = phased(q, &phases[0..]);
            let f = phased(q, &phases[2..]);
            let g = phased(q, &phases[4..]).transpose();
            let h = phased(q, &phases[6..]).conj();
            let h1 = &phases[14..14 + q];
            let h2 = &phases[18..18 + q];
            let u = hadamard_gate(&e, &f, &g, &h, h1, h2).unwrap();
            prop_assert!(u.is_unitary(1e-10));
            prop_assert!(u.is_dual_unitary(1e-10));
            prop_assert!(check_kim_property(&u, 1e-10));
            prop_assert_eq!(u.dual().dual(), u);
        }
    }
}
