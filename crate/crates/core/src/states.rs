//! Initial states: computational products, maximally entangled pairs and
//! two-site solvable matrix product states.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};

/// Full amplitude vector of `n` sites with local dimension `q`; site 0 is the
/// most significant digit of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    q: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(n: usize, q: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = checked_dim(q, n)?;
        if amps.len() != dim {
            return Err(Error::Shape(format!(
                "{} amplitudes for {n} sites of dimension {q}",
                amps.len()
            )));
        }
        Ok(Self { n, q, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tensor product with `other` placed to the right.
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        if self.q != other.q {
            return Err(Error::Shape("local dimensions differ".into()));
        }
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector::new(self.n + other.n, self.q, amps)
    }

    /// Reduced density matrix of the contiguous block `start..start + len`.
    pub fn reduced_density_matrix(&self, start: usize, len: usize) -> Result<ComplexMatrix> {
        if start + len > self.n {
            return Err(Error::OutOfRange(format!(
                "sites {start}..{} of {}",
                start + len,
                self.n
            )));
        }
        let left = self.q.pow(start as u32);
        let mid = self.q.pow(len as u32);
        let right = self.q.pow((self.n - start - len) as u32);
        let mut rho = ComplexMatrix::zeros(mid, mid);
        for l in 0..left {
            for i in 0..mid {
                for j in 0..mid {
                    let mut s = ZERO;
                    for r in 0..right {
                        let a = self.amps[(l * mid + i) * right + r];
                        let b = self.amps[(l * mid + j) * right + r];
                        s += a * b.conj();
                    }
                    rho[(i, j)] += s;
                }
            }
        }
        Ok(rho)
    }
}

pub(crate) fn checked_dim(q: usize, n: usize) -> Result<usize> {
    if q == 0 {
        return Err(Error::InvalidDimension(
            "local dimension must be positive".into(),
        ));
    }
    q.checked_pow(n as u32)
        .ok_or(Error::Overflow("state dimension"))
}

/// `|z_0 z_1 ... z_{n-1}>`.
pub fn computational_product_state(n: usize, q: usize, z: &[usize]) -> Result<StateVector> {
    if z.len() != n {
        return Err(Error::Shape(format!("{} digits for {n} sites", z.len())));
    }
    if let Some(&bad) = z.iter().find(|&&d| d >= q) {
        return Err(Error::OutOfRange(format!("digit {bad} with q = {q}")));
    }
    let dim = checked_dim(q, n)?;
    let idx = z.iter().fold(0, |acc, &d| acc * q + d);
    let mut amps = vec![ZERO; dim];
    amps[idx] = ONE;
    StateVector::new(n, q, amps)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    /// Closed: amplitudes are traces of the matrix products.
    Trace,
    /// Open: `left^T N ... N right`.
    Vectors { left: Vec<C64>, right: Vec<C64> },
}

/// Two-site translation-invariant MPS with tensors `N^{(i,j)}` of size `chi x chi`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvableMps {
    q: usize,
    chi: usize,
    tensors: Vec<ComplexMatrix>,
    boundary: Boundary,
}

impl SolvableMps {
    /// `tensors[i * q + j]` is `N^{(i,j)}`.
    pub fn new(
        q: usize,
        chi: usize,
        tensors: Vec<ComplexMatrix>,
        boundary: Boundary,
    ) -> Result<Self> {
        if q == 0 || chi == 0 {
            return Err(Error::InvalidMps("q and chi must be positive".into()));
        }
        if tensors.len() != q * q {
            return Err(Error::InvalidMps(format!(
                "expected {} tensors, got {}",
                q * q,
                tensors.len()
            )));
        }
        if tensors.iter().any(|t| t.rows() != chi || t.cols() != chi) {
            return Err(Error::InvalidMps(format!(
                "every tensor must be {chi}x{chi}"
            )));
        }
        if let Boundary::Vectors { left, right } = &boundary {
            if left.len() != chi || right.len() != chi {
                return Err(Error::InvalidMps(
                    "boundary vectors must have length chi".into(),
                ));
            }
        }
        Ok(Self {
            q,
            chi,
            tensors,
            boundary,
        })
    }

    /// Bond dimension one with `N^{(i,j)} = alpha_ij`.
    pub fn from_pair_matrix(alpha: &ComplexMatrix) -> Result<Self> {
        let q = alpha.rows();
        let tensors = (0..q * q)
            .map(|n| ComplexMatrix::diag(&[alpha[(n / q, n % q)]]))
            .collect();
        Self::new(q, 1, tensors, Boundary::Trace)
    }

    /// `N^{(i,j)} = delta_ij / sqrt(q)`: a product of maximally entangled pairs.
    pub fn bell(q: usize) -> Result<Self> {
        let s = 1.0 / (q as f64).sqrt();
        Self::from_pair_matrix(&ComplexMatrix::identity(q).scale(C64::new(s, 0.0)))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn tensor(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.tensors[i * self.q + j]
    }

    pub fn tensors(&self) -> &[ComplexMatrix] {
        &self.tensors
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    /// `<i|<a| W |j>|b> = sqrt(q) N^{(i,j)}_{ab}` with row `i chi + a` and column `j chi + b`.
    pub fn w_matrix(&self) -> ComplexMatrix {
        let (q, chi) = (self.q, self.chi);
        let s = (q as f64).sqrt();
        ComplexMatrix::from_fn(q * chi, q * chi, |r, c| {
            self.tensor(r / chi, c / chi)[(r % chi, c % chi)] * s
        })
    }

    pub fn solvability_violation(&self) -> f64 {
        self.w_matrix().unitarity_violation()
    }

    pub fn is_solvable(&self, tol: f64) -> bool {
        self.solvability_violation() <= tol
    }
}

pub fn is_solvable_mps(s: &SolvableMps, tol: f64) -> bool {
    s.is_solvable(tol)
}

/// Prepared state together with its norm before normalisation.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: StateVector,
    pub raw_norm: f64,
}

/// Evaluates the MPS on `n` sites with pairs `(0,1), (2,3), ...`; for odd `n`
/// the last site holds `leftover` (default `|0>`).
pub fn solvable_mps_state(
    s: &SolvableMps,
    n: usize,
    leftover: Option<&[C64]>,
) -> Result<PreparedState> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "MPS state needs n >= 2, got {n}"
        )));
    }
    let (q, chi) = (s.q, s.chi);
    let pairs = n / 2;
    checked_dim(q, n)?;
    // amps[x] holds the chi x chi matrix product for pair digits x.
    let mut partial: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(chi)];
    for _ in 0..pairs {
        let mut next = Vec::with_capacity(partial.len() * q * q);
        for m in &partial {
            for t in &s.tensors {
                next.push(m.matmul(t)?);
            }
        }
        partial = next;
    }
    let mut amps: Vec<C64> = match &s.boundary {
        Boundary::Trace => partial.iter().map(|m| m.trace()).collect(),
        Boundary::Vectors { left, right } => partial
            .iter()
            .map(|m| {
                let mr = m.apply(right).expect("chi-sized boundary");
                left.iter().zip(&mr).map(|(l, x)| l * x).sum()
            })
            .collect(),
    };
    if n % 2 == 1 {
        let default_ket: Vec<C64> = (0..q).map(|i| if i == 0 { ONE } else { ZERO }).collect();
        let ket = leftover.unwrap_or(&default_ket);
        if ket.len() != q {
            return Err(Error::Shape(format!("leftover ket must have length {q}")));
        }
        amps = amps
            .iter()
            .flat_map(|a| ket.iter().map(move |k| a * k))
            .collect();
    }
    let raw_norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if raw_norm < 1e-300 || !raw_norm.is_finite() {
        return Err(Error::DegenerateState);
    }
    for a in amps.iter_mut() {
        *a /= raw_norm;
    }
    Ok(PreparedState {
        state: StateVector::new(n, q, amps)?,
        raw_norm,
    })
}

/// Product of `pairs` copies of the two-site state with amplitudes `alpha_ij`.
pub fn ueb_pair_state(alpha: &ComplexMatrix, pairs: usize) -> Result<StateVector> {
    let q = alpha.rows();
    if !alpha.is_square() || q == 0 {
        return Err(Error::Shape("pair matrix must be square".into()));
    }
    let v = alpha.unitarity_violation_scaled(1.0 / q as f64);
    if v > 1e-10 {
        return Err(Error::NotUnitary(v));
    }
    let pair = StateVector::new(2, q, alpha.data().to_vec())?;
    let mut state = StateVector::new(0, q, vec![ONE])?;
    for _ in 0..pairs {
        state = state.kron(&pair)?;
    }
    Ok(state)
}
