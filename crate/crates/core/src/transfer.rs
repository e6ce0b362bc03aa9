//! Transfer matrices in the space direction.
//!
//! A brick-wall circuit of `t` steps is read sideways: the cut through the
//! worldline of an even site `x` carries the wires of that worldline, and
//! one transfer step moves the cut from `x` to `x + 2`, absorbing the gates
//! and the measurement outcomes in between. Gates act on `(0,1), (2,3), ...`
//! in the first layer of every step.
//!
//! * Computational scheme: every site starts in a computational state and
//!   every bath site is measured in the computational basis. The cut holds
//!   the `2t - 1` inner wires of the worldline; an outcome is the pair
//!   `(z_{x+1}, z_{x+2})`.
//! * Solvable scheme: a two-site MPS on pairs `(x+1, x+2)` and pair
//!   measurements on `(x, x+1)` in the basis of a unitary error basis. The
//!   cut holds the MPS bond followed by all `2t + 1` wires; an outcome is
//!   the index of the measured basis state.
//!
//! For dual-unitary gates (with the KIM property in the computational
//! scheme, and a solvable MPS in the other) every single-outcome matrix is
//! `1/q` times a unitary.

use serde::{Deserialize, Serialize};

use crate::biunitary::{Gate, UnitaryErrorBasis};
use crate::combinatorics::Permutation;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, inner, normalize, random_vector, ComplexMatrix, C64, ONE, ZERO};
use crate::states::SolvableMps;

/// Largest folded dimension `cut_dim^(2m)` handled.
pub const FOLDED_CAP: usize = 1 << 21;

/// Largest folded dimension for which the dense folded matrix is built.
pub const DENSE_FOLDED_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub enum TransferScheme {
    /// Initial values `init[0]` on even sites and `init[1]` on odd sites.
    Computational { init: [usize; 2] },
    Solvable {
        mps: SolvableMps,
        basis: UnitaryErrorBasis,
    },
}

impl TransferScheme {
    pub fn computational() -> Self {
        Self::Computational { init: [0, 0] }
    }

    /// Bell pairs measured in the generalized Pauli basis.
    pub fn bell(q: usize) -> Result<Self> {
        Ok(Self::Solvable {
            mps: SolvableMps::bell(q)?,
            basis: UnitaryErrorBasis::generalized_pauli(q)?,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Computational { .. } => "computational",
            Self::Solvable { .. } => "solvable",
        }
    }
}

/// Single-outcome transfer matrices `M(outcome)` on the cut space.
#[derive(Clone, Debug)]
pub struct SpaceTransfer {
    q: usize,
    t: usize,
    cut_dim: usize,
    outcomes: Vec<ComplexMatrix>,
}

fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, f| acc.kron(f))
}

/// Builds `M(outcome)` for every outcome, ordered as `z0 * q + z1` or by basis index.
pub fn single_outcome_transfer(
    gate: &Gate,
    t: usize,
    scheme: &TransferScheme,
) -> Result<SpaceTransfer> {
    let q = gate.q();
    if t == 0 {
        return Err(Error::InvalidDimension(
            "transfer matrix needs t >= 1".into(),
        ));
    }
    let dual = gate.dual().matrix().clone();
    let outcomes = match scheme {
        TransferScheme::Computational { init } => {
            if init.iter().any(|&i| i >= q) {
                return Err(Error::OutOfRange(format!("initial value outside 0..{q}")));
            }
            let a1 = ComplexMatrix::from_fn(q, q, |r, s| gate.entry(s, r, init[0], init[1]));
            let mut fa = vec![a1];
            fa.extend((1..t).map(|_| dual.clone()));
            let a = kron_all(&fa);
            (0..q * q)
                .map(|z| {
                    let bw = ComplexMatrix::from_fn(q, q, |u, r| gate.entry(z / q, z % q, r, u));
                    let mut fb: Vec<ComplexMatrix> = (1..t).map(|_| dual.clone()).collect();
                    fb.push(bw);
                    kron_all(&fb).matmul(&a)
                })
                .collect::<Result<Vec<_>>>()?
        }
        TransferScheme::Solvable { mps, basis } => {
            if mps.q() != q || basis.q() != q {
                return Err(Error::Shape("MPS, basis and gate must share q".into()));
            }
            let chi = mps.chi();
            let s = 1.0 / (q as f64).sqrt();
            let n_map = ComplexMatrix::from_fn(chi * q, chi * q, |row, col| {
                let (b2, j) = (row / q, row % q);
                let (b, i) = (col / q, col % q);
                mps.tensor(i, j)[(b, b2)]
            });
            let mut f2 = vec![n_map];
            f2.extend((0..t).map(|_| dual.clone()));
            let step2 = kron_all(&f2);
            (0..basis.len())
                .map(|n| {
                    let alpha = basis.member(n);
                    let c = ComplexMatrix::from_fn(q, q, |k, i| alpha[(i, k)].conj() * s);
                    let mut f1 = vec![ComplexMatrix::identity(chi)];
                    f1.extend((0..t).map(|_| dual.clone()));
                    f1.push(c);
                    step2.matmul(&kron_all(&f1))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let cut_dim = outcomes[0].rows();
    Ok(SpaceTransfer {
        q,
        t,
        cut_dim,
        outcomes,
    })
}

/// `v <- (I ⊗ mat ⊗ I) v` on axis `axis` of a rank-`rank` tensor with all dimensions `d`.
fn apply_on_axis(v: &[C64], d: usize, rank: usize, axis: usize, mat: &ComplexMatrix) -> Vec<C64> {
    let right = d.pow((rank - axis - 1) as u32);
    let left = v.len() / (d * right);
    let mut out = vec![ZERO; v.len()];
    for l in 0..left {
        let base = l * d * right;
        for i in 0..d {
            let dst = base + i * right;
            for j in 0..d {
                let c = mat[(i, j)];
                if c == ZERO {
                    continue;
                }
                let src = base + j * right;
                for r in 0..right {
                    out[dst + r] += c * v[src + r];
                }
            }
        }
    }
    out
}

impl SpaceTransfer {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn cut_dim(&self) -> usize {
        self.cut_dim
    }

    pub fn outcomes(&self) -> &[ComplexMatrix] {
        &self.outcomes
    }

    /// Max over outcomes of the deviation of `q M` from a unitary.
    pub fn proportionality_violation(&self) -> f64 {
        let s = C64::new(self.q as f64, 0.0);
        self.outcomes
            .iter()
            .map(|m| m.scale(s).unitarity_violation())
            .fold(0.0, f64::max)
    }

    pub fn folded_dim(&self, m: usize) -> Result<usize> {
        let dim = self
            .cut_dim
            .checked_pow((2 * m) as u32)
            .ok_or(Error::Overflow("folded dimension"))?;
        if dim > FOLDED_CAP {
            return Err(Error::CapExceeded {
                what: "folded transfer dimension",
                needed: dim,
                cap: FOLDED_CAP,
            });
        }
        Ok(dim)
    }

    /// `T_m v` with `T_m = sum_outcomes (M ⊗ M*)^{⊗m}` on operands ordered `(a_1, a'_1, ..., a_m, a'_m)`.
    pub fn folded_apply(&self, m: usize, v: &[C64]) -> Result<Vec<C64>> {
        let dim = self.folded_dim(m)?;
        if v.len() != dim {
            return Err(Error::Shape(format!(
                "folded vector must have length {dim}"
            )));
        }
        let d = self.cut_dim;
        let mut acc = vec![ZERO; dim];
        for mat in &self.outcomes {
            let conj = mat.conj();
            let mut w = v.to_vec();
            for axis in 0..2 * m {
                w = apply_on_axis(&w, d, 2 * m, axis, if axis % 2 == 0 { mat } else { &conj });
            }
            for (a, x) in acc.iter_mut().zip(&w) {
                *a += x;
            }
        }
        Ok(acc)
    }

    /// Dense `T_m`; only for folded dimensions up to [`DENSE_FOLDED_CAP`].
    pub fn folded_matrix(&self, m: usize) -> Result<ComplexMatrix> {
        let dim = self.folded_dim(m)?;
        if dim > DENSE_FOLDED_CAP {
            return Err(Error::CapExceeded {
                what: "dense folded transfer matrix",
                needed: dim,
                cap: DENSE_FOLDED_CAP,
            });
        }
        let mut total = ComplexMatrix::zeros(dim, dim);
        for mat in &self.outcomes {
            let pair = mat.kron(&mat.conj());
            total = &total + &kron_all(&vec![pair; m]);
        }
        Ok(total)
    }
}

/// Folded vector of `P(pi)`: entries `prod_i delta(a_i, a'_{pi(i)})` in the `(a_1, a'_1, ...)` layout.
pub fn permutation_eigenoperator(p: &Permutation, d: usize) -> Vec<C64> {
    let m = p.degree();
    let dim = d.pow((2 * m) as u32);
    let mut v = vec![ZERO; dim];
    let mut digits = vec![0usize; 2 * m];
    for a in 0..d.pow(m as u32) {
        let mut x = a;
        for i in (0..m).rev() {
            digits[2 * i] = x % d;
            x /= d;
        }
        for i in 0..m {
            digits[2 * p.apply(i) + 1] = digits[2 * i];
        }
        let idx = digits.iter().fold(0, |acc, &g| acc * d + g);
        v[idx] = ONE;
    }
    v
}

/// `q^{2(1-m)}`, the eigenvalue of every `P(pi)`.
pub fn leading_eigenvalue(q: usize, m: usize) -> f64 {
    (q as f64).powi(2 * (1 - m as i32))
}

/// `||T_m P(pi) - q^{2(1-m)} P(pi)|| / ||P(pi)||`.
pub fn verify_eigen(tr: &SpaceTransfer, p: &Permutation) -> Result<f64> {
    let m = p.degree();
    let v = permutation_eigenoperator(p, tr.cut_dim);
    let tv = tr.folded_apply(m, &v)?;
    let lambda = leading_eigenvalue(tr.q, m);
    let res: f64 = tv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum();
    let norm: f64 = v.iter().map(|b| b.norm_sqr()).sum();
    Ok((res / norm).sqrt())
}

/// Orthonormal basis of `span{P(pi) : pi in S_m}`.
pub fn permutation_span(d: usize, m: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for p in Permutation::all(m) {
        let mut v = permutation_eigenoperator(&p, d);
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let before = (d.pow(m as u32) as f64).sqrt();
        if normalize(&mut v) > 1e-8 * before {
            basis.push(v);
        }
    }
    basis
}

#[derive(Clone, Copy, Debug)]
pub struct EigsOptions {
    pub krylov: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigsOptions {
    fn default() -> Self {
        Self {
            krylov: 40,
            tol: 1e-8,
            max_restarts: 200,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LeadingEigs {
    /// Ritz values sorted by decreasing modulus.
    pub values: Vec<C64>,
    /// Residual norm of the leading Ritz pair relative to its modulus.
    pub residual: f64,
    pub restarts: usize,
}

fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for u in basis {
        let c = inner(u, v);
        for (x, y) in v.iter_mut().zip(u) {
            *x -= c * y;
        }
    }
}

/// Leading eigenvalues of `T_m` on the quotient by `span{P(pi)}`, by restarted Arnoldi.
pub fn leading_eigs(
    tr: &SpaceTransfer,
    m: usize,
    count: usize,
    opts: &EigsOptions,
) -> Result<LeadingEigs> {
    let dim = tr.folded_dim(m)?;
    let deflate = permutation_span(tr.cut_dim, m);
    let free = dim - deflate.len();
    if free == 0 {
        return Ok(LeadingEigs {
            values: Vec::new(),
            residual: 0.0,
            restarts: 0,
        });
    }
    let k_max = opts.krylov.min(free).max(1);
    let mut start = random_vector(dim, opts.seed);
    project_out(&mut start, &deflate);
    let mut last = LeadingEigs {
        values: Vec::new(),
        residual: f64::INFINITY,
        restarts: 0,
    };
    for restart in 0..=opts.max_restarts {
        if normalize(&mut start) < 1e-300 {
            return Err(Error::NoConvergence);
        }
        let mut vs: Vec<Vec<C64>> = vec![start.clone()];
        let mut h = ComplexMatrix::zeros(k_max + 1, k_max);
        let mut k = 0;
        let mut breakdown = false;
        while k < k_max {
            let mut w = tr.folded_apply(m, &vs[k])?;
            project_out(&mut w, &deflate);
            for _ in 0..2 {
                for (i, u) in vs.iter().enumerate() {
                    let c = inner(u, &w);
                    h[(i, k)] += c;
                    for (x, y) in w.iter_mut().zip(u) {
                        *x -= c * y;
                    }
                }
                project_out(&mut w, &deflate);
            }
            let beta = normalize(&mut w);
            h[(k + 1, k)] = C64::new(beta, 0.0);
            k += 1;
            if beta < 1e-12 {
                breakdown = true;
                break;
            }
            vs.push(w);
        }
        let hk = ComplexMatrix::from_fn(k, k, |i, j| h[(i, j)]);
        let evd = hk.to_faer().eigen().map_err(|_| Error::NoConvergence)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s[b].norm().total_cmp(&s[a].norm()));
        let top = order[0];
        let theta = s[top];
        let y: Vec<C64> = (0..k).map(|i| u[(i, top)]).collect();
        let ynorm = y.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let residual = if breakdown {
            0.0
        } else {
            h[(k, k - 1)].norm() * y[k - 1].norm() / ynorm / theta.norm().max(1e-300)
        };
        last = LeadingEigs {
            values: order.iter().take(count).map(|&i| s[i]).collect(),
            residual,
            restarts: restart,
        };
        if residual <= opts.tol {
            return Ok(last);
        }
        start = vec![ZERO; dim];
        for (coef, v) in y.iter().zip(&vs) {
            for (x, b) in start.iter_mut().zip(v) {
                *x += coef * b;
            }
        }
        project_out(&mut start, &deflate);
    }
    if last.residual <= opts.tol.sqrt() {
        Ok(last)
    } else {
        Err(Error::NoConvergence)
    }
}

/// Every eigenvalue of the dense `T_m`, sorted by decreasing modulus.
pub fn folded_spectrum(tr: &SpaceTransfer, m: usize) -> Result<Vec<C64>> {
    eigenvalues(&tr.folded_matrix(m)?)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeSpec {
    pub gate: String,
    pub q: usize,
    pub t: usize,
    pub m: usize,
    pub scheme: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PermutationResidual {
    pub permutation: Vec<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralReport {
    pub spec: ProbeSpec,
    /// `q^{2(1-m)}`.
    pub leading: f64,
    /// Largest moduli of the spectrum outside `span{P(pi)}`.
    pub eigen_magnitudes: Vec<f64>,
    pub residuals: Vec<PermutationResidual>,
    /// `leading - eigen_magnitudes[0]`.
    pub gap: f64,
    /// Deviation of `q M` from a unitary, maximised over outcomes.
    pub proportionality_violation: f64,
    pub arnoldi_residual: f64,
}

impl SpectralReport {
    /// Whether the leading eigenvalue is degenerate beyond the permutation operators.
    pub fn enlarged_degeneracy(&self, tol: f64) -> bool {
        self.gap <= tol * self.leading
    }
}

pub fn spectral_report(
    gate: &Gate,
    gate_id: &str,
    t: usize,
    m: usize,
    scheme: &TransferScheme,
    count: usize,
) -> Result<SpectralReport> {
    let tr = single_outcome_transfer(gate, t, scheme)?;
    let residuals = Permutation::all(m)
        .iter()
        .map(|p| {
            Ok(PermutationResidual {
                permutation: p.images().to_vec(),
                residual: verify_eigen(&tr, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let eigs = leading_eigs(&tr, m, count, &EigsOptions::default())?;
    let leading = leading_eigenvalue(tr.q, m);
    let eigen_magnitudes: Vec<f64> = eigs.values.iter().map(|z| z.norm()).collect();
    let gap = leading - eigen_magnitudes.first().copied().unwrap_or(0.0);
    Ok(SpectralReport {
        spec: ProbeSpec {
            gate: gate_id.to_string(),
            q: tr.q,
            t,
            m,
            scheme: scheme.label().to_string(),
        },
        leading,
        eigen_magnitudes,
        residuals,
        gap,
        proportionality_violation: tr.proportionality_violation(),
        arnoldi_residual: eigs.residual,
    })
}
