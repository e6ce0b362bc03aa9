//! Projected ensembles, their moments and trace distances to Haar moments.

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{Accum, Mat};

use crate::biunitary::Gate;
use crate::biunitary::UnitaryErrorBasis;
use crate::circuit::apply_two_site_gate;
use crate::combinatorics::{rising_factorial_f64, Permutation};
use crate::error::{Error, Result};
use crate::linalg::{faer_hermitian_eigenvalues, hermitian_eigenvalues, ComplexMatrix, C64, ONE};
use crate::states::StateVector;

/// Outcomes with probability at or below this are dropped and their mass recorded.
pub const P_FLOOR: f64 = 1e-14;

/// Largest full-space moment dimension `d^k` built by default.
pub const FULL_REPR_CAP: usize = 4096;

/// Outcomes folded into one rank-block update.
pub const BLOCK: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementScheme {
    /// Every bath site in the computational basis.
    Computational,
    /// Bath sites grouped in neighbouring pairs measured in the basis
    /// `|alpha_n> = sum_ij (alpha_n)_ij / sqrt(q) |ij>`. `offset` bath sites
    /// before the first pair and any unpaired site at the end are measured
    /// in the computational basis.
    Ueb {
        basis: UnitaryErrorBasis,
        offset: usize,
    },
}

impl MeasurementScheme {
    pub fn bell(q: usize) -> Result<Self> {
        Ok(Self::Ueb {
            basis: UnitaryErrorBasis::generalized_pauli(q)?,
            offset: 0,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Computational => "computational",
            Self::Ueb { .. } => "ueb",
        }
    }

    /// Left sites of measured pairs for a bath occupying `n_a..n_a + n_b`.
    pub fn pair_sites(&self, n_a: usize, n_b: usize) -> Vec<usize> {
        match self {
            Self::Computational => Vec::new(),
            Self::Ueb { offset, .. } => (n_a + offset..(n_a + n_b).saturating_sub(1))
                .step_by(2)
                .collect(),
        }
    }

    /// Unitary mapping `|ij>` to the outcome index `n`: `B_{n, ij} = conj(alpha_n)_ij / sqrt(q)`.
    pub fn pair_rotation(basis: &UnitaryErrorBasis) -> Result<Gate> {
        let q = basis.q();
        let s = 1.0 / (q as f64).sqrt();
        let m = ComplexMatrix::from_fn(q * q, q * q, |n, ij| {
            basis.member(n)[(ij / q, ij % q)].conj() * s
        });
        Gate::from_matrix(m)
    }
}

#[derive(Clone, Debug)]
pub struct ProjectedEnsemble {
    pub d_a: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub scheme: &'static str,
    /// `(p, psi)` with `psi` normalised.
    pub entries: Vec<(f64, Vec<C64>)>,
    pub dropped_mass: f64,
}

impl ProjectedEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|(p, _)| p).sum()
    }

    /// Builds an ensemble from explicit weights and states.
    pub fn from_entries(d_a: usize, entries: Vec<(f64, Vec<C64>)>) -> Result<Self> {
        if entries.iter().any(|(_, v)| v.len() != d_a) {
            return Err(Error::Shape(format!("every state must have length {d_a}")));
        }
        Ok(Self {
            d_a,
            n_a: 0,
            n_b: 0,
            scheme: "custom",
            entries,
            dropped_mass: 0.0,
        })
    }
}

/// Bath amplitudes in the scheme's measurement basis, as a `d_A x d_B` row-major matrix.
fn measured_amplitudes(
    state: &StateVector,
    n_a: usize,
    scheme: &MeasurementScheme,
) -> Result<Vec<C64>> {
    if n_a > state.n() {
        return Err(Error::Shape(format!(
            "system of {n_a} sites in a chain of {}",
            state.n()
        )));
    }
    match scheme {
        MeasurementScheme::Computational => Ok(state.amplitudes().to_vec()),
        MeasurementScheme::Ueb { basis, .. } => {
            if basis.q() != state.q() {
                return Err(Error::Shape(format!(
                    "measurement basis of dimension {} on sites of dimension {}",
                    basis.q(),
                    state.q()
                )));
            }
            let rotation = MeasurementScheme::pair_rotation(basis)?;
            let mut rotated = state.clone();
            for site in scheme.pair_sites(n_a, state.n() - n_a) {
                apply_two_site_gate(&mut rotated, &rotation, site)?;
            }
            Ok(rotated.into_amplitudes())
        }
    }
}

/// Projects the last `N - n_a` sites onto every measurement outcome.
pub fn project_ensemble(
    state: &StateVector,
    n_a: usize,
    scheme: &MeasurementScheme,
) -> Result<ProjectedEnsemble> {
    let amps = measured_amplitudes(state, n_a, scheme)?;
    let d_a = state.q().pow(n_a as u32);
    let d_b = amps.len() / d_a;
    let mut entries = Vec::with_capacity(d_b);
    let mut dropped = 0.0;
    for z in 0..d_b {
        let mut psi: Vec<C64> = (0..d_a).map(|a| amps[a * d_b + z]).collect();
        let p: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if p <= P_FLOOR {
            dropped += p;
            continue;
        }
        let s = 1.0 / p.sqrt();
        for x in psi.iter_mut() {
            *x *= s;
        }
        entries.push((p, psi));
    }
    Ok(ProjectedEnsemble {
        d_a,
        n_a,
        n_b: state.n() - n_a,
        scheme: scheme.label(),
        entries,
        dropped_mass: dropped,
    })
}

/// Orthonormal basis of the symmetric subspace of `(C^d)^{(x)k}`, labelled by
/// non-decreasing index tuples in lexicographic order.
#[derive(Clone, Debug)]
pub struct SymmetricBasis {
    d: usize,
    k: usize,
    tuples: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl SymmetricBasis {
    pub fn new(d: usize, k: usize) -> Self {
        let mut tuples = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..d {
                cur.push(i);
                rec(d, k, i, cur, out);
                cur.pop();
            }
        }
        rec(d, k, 0, &mut cur, &mut tuples);
        let weights = tuples
            .iter()
            .map(|t| {
                let mut denom = 1.0;
                let mut run = 1;
                for w in t.windows(2) {
                    if w[0] == w[1] {
                        run += 1;
                    } else {
                        denom *= factorial(run);
                        run = 1;
                    }
                }
                denom *= factorial(run);
                (factorial(k) / denom).sqrt()
            })
            .collect();
        Self {
            d,
            k,
            tuples,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    /// Coordinates of `psi^{(x)k}`: `sqrt(k!/prod m_i!) prod psi_i^{m_i}`.
    pub fn coords(&self, psi: &[C64]) -> Vec<C64> {
        self.tuples
            .iter()
            .zip(&self.weights)
            .map(|(t, &w)| t.iter().fold(C64::new(w, 0.0), |acc, &i| acc * psi[i]))
            .collect()
    }

    /// Isometry `V` (`d^k x D_sym`) embedding the symmetric basis in the full space.
    pub fn embedding(&self) -> ComplexMatrix {
        let full = self.d.pow(self.k as u32);
        let mut v = ComplexMatrix::zeros(full, self.dim());
        for (col, t) in self.tuples.iter().enumerate() {
            let perms = Permutation::all(self.k);
            let mut hits: Vec<usize> = perms
                .iter()
                .map(|p| (0..self.k).fold(0, |acc, j| acc * self.d + t[p.apply(j)]))
                .collect();
            hits.sort_unstable();
            hits.dedup();
            let amp = 1.0 / (hits.len() as f64).sqrt();
            for h in hits {
                v[(h, col)] = C64::new(amp, 0.0);
            }
        }
        v
    }
}

pub fn sym_coords(psi: &[C64], k: usize) -> Vec<C64> {
    SymmetricBasis::new(psi.len(), k).coords(psi)
}

/// `binom(d + k - 1, k)`.
pub fn sym_dim(d: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (d + i) / (i + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repr {
    Full,
    Symmetric,
}

/// A k-th moment operator.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    pub d: usize,
    pub k: usize,
    pub repr: Repr,
    pub matrix: ComplexMatrix,
}

impl MomentOperator {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }
}

fn check_full_cap(d: usize, k: usize) -> Result<usize> {
    let dim = d
        .checked_pow(k as u32)
        .ok_or(Error::Overflow("moment dimension"))?;
    if dim > FULL_REPR_CAP {
        return Err(Error::CapExceeded {
            what: "full-space moment dimension",
            needed: dim,
            cap: FULL_REPR_CAP,
        });
    }
    Ok(dim)
}

/// Lower triangle of `sum_j w_j v_j v_j^dag`, accumulated in blocks of [`BLOCK`].
fn weighted_gram<'a>(dim: usize, items: impl Iterator<Item = (f64, Vec<C64>)> + 'a) -> Mat<C64> {
    let mut acc = Mat::<C64>::zeros(dim, dim);
    let mut block: Vec<Vec<C64>> = Vec::with_capacity(BLOCK);
    let flush = |acc: &mut Mat<C64>, block: &mut Vec<Vec<C64>>| {
        if block.is_empty() {
            return;
        }
        let b = Mat::<C64>::from_fn(dim, block.len(), |i, j| block[j][i]);
        triangular::matmul(
            acc.as_mut(),
            BlockStructure::TriangularLower,
            Accum::Add,
            b.as_ref(),
            BlockStructure::Rectangular,
            b.adjoint(),
            BlockStructure::Rectangular,
            ONE,
            faer::get_global_parallelism(),
        );
        block.clear();
    };
    for (w, mut v) in items {
        let s = w.sqrt();
        for x in v.iter_mut() {
            *x *= s;
        }
        block.push(v);
        if block.len() == BLOCK {
            flush(&mut acc, &mut block);
        }
    }
    flush(&mut acc, &mut block);
    acc
}

fn lower_to_hermitian(m: &Mat<C64>) -> ComplexMatrix {
    let n = m.nrows();
    ComplexMatrix::from_fn(
        n,
        n,
        |i, j| if i >= j { m[(i, j)] } else { m[(j, i)].conj() },
    )
}

/// `psi^{(x)k}` as a full-space vector.
fn tensor_power(psi: &[C64], k: usize) -> Vec<C64> {
    let mut out = vec![ONE];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|a| psi.iter().map(move |b| a * b))
            .collect();
    }
    out
}

/// `sum_z p(z) (|psi_z><psi_z|)^{(x)k}`.
pub fn moment_k(ens: &ProjectedEnsemble, k: usize, repr: Repr) -> Result<MomentOperator> {
    if k == 0 {
        return Err(Error::InvalidDimension(
            "moment order must be at least 1".into(),
        ));
    }
    let d = ens.d_a;
    let lower = match repr {
        Repr::Full => {
            let dim = check_full_cap(d, k)?;
            weighted_gram(
                dim,
                ens.entries
                    .iter()
                    .map(|(p, psi)| (*p, tensor_power(psi, k))),
            )
        }
        Repr::Symmetric => {
            let basis = SymmetricBasis::new(d, k);
            weighted_gram(
                basis.dim(),
                ens.entries.iter().map(|(p, psi)| (*p, basis.coords(psi))),
            )
        }
    };
    Ok(MomentOperator {
        d,
        k,
        repr,
        matrix: lower_to_hermitian(&lower),
    })
}

/// Permutation operator `P(pi)|i_1..i_k> = |i_{pi^-1(1)}..i_{pi^-1(k)}>` on `(C^d)^{(x)k}`.
pub fn permutation_operator(p: &Permutation, d: usize) -> ComplexMatrix {
    let k = p.degree();
    let dim = d.pow(k as u32);
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0; k];
    let mut out = vec![0; k];
    for col in 0..dim {
        let mut x = col;
        for slot in digits.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        for i in 0..k {
            out[p.apply(i)] = digits[i];
        }
        let row = out.iter().fold(0, |acc, &v| acc * d + v);
        m[(row, col)] = ONE;
    }
    m
}

/// `sum_pi P(pi)` over `S_k`.
pub fn permutation_sum(d: usize, k: usize) -> ComplexMatrix {
    let dim = d.pow(k as u32);
    let mut s = ComplexMatrix::zeros(dim, dim);
    for p in Permutation::all(k) {
        s = &s + &permutation_operator(&p, d);
    }
    s
}

/// Haar moment: `sum_pi P(pi) / (d (d+1) .. (d+k-1))` in full space, `I / D_sym` in the symmetric one.
pub fn haar_moment(d: usize, k: usize, repr: Repr) -> Result<MomentOperator> {
    let matrix = match repr {
        Repr::Full => {
            check_full_cap(d, k)?;
            permutation_sum(d, k).scale(C64::new(1.0 / rising_factorial_f64(d as f64, k), 0.0))
        }
        Repr::Symmetric => {
            let dim = sym_dim(d, k);
            ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0))
        }
    };
    Ok(MomentOperator { d, k, repr, matrix })
}

/// `1/2 || rho_E^(k) - rho_Haar^(k) ||_1`, computed in the symmetric subspace.
pub fn delta_k(ens: &ProjectedEnsemble, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidDimension(
            "moment order must be at least 1".into(),
        ));
    }
    let basis = SymmetricBasis::new(ens.d_a, k);
    let lower = weighted_gram(
        basis.dim(),
        ens.entries.iter().map(|(p, psi)| (*p, basis.coords(psi))),
    );
    let shift = 1.0 / basis.dim() as f64;
    let values = faer_hermitian_eigenvalues(&lower)?;
    Ok(0.5 * values.iter().map(|l| (l - shift).abs()).sum::<f64>())
}

/// Same distance built from full-space operators.
pub fn delta_k_full(ens: &ProjectedEnsemble, k: usize) -> Result<f64> {
    let rho = moment_k(ens, k, Repr::Full)?;
    let haar = haar_moment(ens.d_a, k, Repr::Full)?;
    let diff = &rho.matrix - &haar.matrix;
    Ok(0.5 * crate::linalg::trace_norm(&diff)?)
}

/// Replica operator `sum_z p(z)^n (|psi~_z><psi~_z|)^{(x)k}` with unnormalised projections.
pub fn rho_nk(
    state: &StateVector,
    n_a: usize,
    scheme: &MeasurementScheme,
    n: i32,
    k: usize,
) -> Result<ComplexMatrix> {
    let amps = measured_amplitudes(state, n_a, scheme)?;
    let d_a = state.q().pow(n_a as u32);
    let dim = check_full_cap(d_a, k)?;
    let d_b = amps.len() / d_a;
    let items = (0..d_b).filter_map(|z| {
        let psi: Vec<C64> = (0..d_a).map(|a| amps[a * d_b + z]).collect();
        let p: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if n < 0 && p <= P_FLOOR {
            return None;
        }
        Some((p.powi(n), tensor_power(&psi, k)))
    });
    Ok(lower_to_hermitian(&weighted_gram(dim, items)))
}

/// `||rho - c S||_F / ||rho||_F` for the best multiple `c` of `S = sum_pi P(pi)`.
pub fn replica_distance(rho: &ComplexMatrix, d: usize, k: usize) -> Result<f64> {
    let s = permutation_sum(d, k);
    if s.rows() != rho.rows() {
        return Err(Error::Shape(
            "replica operator and permutation sum differ in size".into(),
        ));
    }
    let dot = |a: &ComplexMatrix, b: &ComplexMatrix| -> C64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| x.conj() * y)
            .sum()
    };
    let c = dot(&s, rho) / dot(&s, &s);
    let resid = rho - &s.scale(c);
    Ok(resid.frobenius_norm() / rho.frobenius_norm())
}
