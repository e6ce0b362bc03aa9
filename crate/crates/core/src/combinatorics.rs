//! Permutations, Stirling numbers, rising factorials and Weingarten functions.

use std::collections::BTreeMap;

use faer::linalg::solvers::DenseSolveCore;

use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, ComplexMatrix, C64, ZERO};

/// Bijection on `{0, .., m-1}` stored by its images.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &i in &images {
            if i >= m || seen[i] {
                return Err(Error::OutOfRange(format!(
                    "{images:?} is not a permutation"
                )));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            images: (0..m).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self o other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p] = i;
        }
        Permutation { images }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_type().len()
    }

    /// Cycle lengths sorted in decreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let m = self.degree();
        let mut seen = vec![false; m];
        let mut lengths = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    /// All of `S_m` in lexicographic order of the image lists.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(m);
        let mut used = vec![false; m];
        fn rec(m: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if current.len() == m {
                out.push(Permutation {
                    images: current.clone(),
                });
                return;
            }
            for i in 0..m {
                if !used[i] {
                    used[i] = true;
                    current.push(i);
                    rec(m, current, used, out);
                    current.pop();
                    used[i] = false;
                }
            }
        }
        rec(m, &mut current, &mut used, &mut out);
        out
    }
}

pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_count()
}

/// Unsigned Stirling number of the first kind `[m, l]`.
pub fn stirling_first(m: usize, l: usize) -> u64 {
    if l > m {
        return 0;
    }
    let mut row = vec![1u64];
    for n in 0..m {
        // [n+1, k] = n [n, k] + [n, k-1]
        let mut next = vec![0u64; n + 2];
        for (k, slot) in next.iter_mut().enumerate() {
            let keep = row.get(k).copied().unwrap_or(0) * n as u64;
            let grow = if k > 0 { row[k - 1] } else { 0 };
            *slot = keep + grow;
        }
        row = next;
    }
    row[l]
}

/// `d (d+1) ... (d+m-1)` with overflow checking.
pub fn rising_factorial(d: u64, m: u64) -> Result<u64> {
    (0..m).try_fold(1u64, |acc, i| {
        d.checked_add(i)
            .and_then(|f| acc.checked_mul(f))
            .ok_or(Error::Overflow("rising factorial"))
    })
}

pub fn rising_factorial_f64(d: f64, m: usize) -> f64 {
    (0..m).map(|i| d + i as f64).product()
}

/// Weingarten function `Wg(pi, d)` for all `pi` in `S_m`.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    m: usize,
    d: usize,
    perms: Vec<Permutation>,
    values: Vec<f64>,
}

impl WeingartenTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Permutations in lexicographic order, aligned with [`Self::values`].
    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, p: &Permutation) -> f64 {
        let idx = self
            .perms
            .binary_search(p)
            .expect("permutation of matching degree");
        self.values[idx]
    }

    /// One value per conjugacy class, keyed by the lexicographically least member's cycle type.
    pub fn by_class(&self) -> BTreeMap<Vec<usize>, (Permutation, f64)> {
        let mut classes = BTreeMap::new();
        for (p, &v) in self.perms.iter().zip(&self.values) {
            classes
                .entry(p.cycle_type())
                .or_insert_with(|| (p.clone(), v));
        }
        classes
    }
}

/// Gram matrix `G_{s,t} = d^{c(s t^-1)}` over lexicographically ordered `S_m`.
pub fn gram_matrix(m: usize, d: usize) -> (Vec<Permutation>, Vec<Vec<f64>>) {
    let perms = Permutation::all(m);
    let g = perms
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|t| (d as f64).powi(s.compose(&t.inverse()).cycle_count() as i32))
                .collect()
        })
        .collect();
    (perms, g)
}

/// Weingarten values from the inverse Gram matrix: `Wg(pi) = (G^-1)_{pi, e}`.
pub fn weingarten(m: usize, d: usize) -> Result<WeingartenTable> {
    if d < m || d == 0 {
        return Err(Error::DimensionTooSmall { m, d });
    }
    let (perms, g) = gram_matrix(m, d);
    let n = perms.len();
    let mat = faer::Mat::<f64>::from_fn(n, n, |i, j| g[i][j]);
    let inv = mat.partial_piv_lu().inverse();
    // The identity is the lexicographically first permutation.
    let values = (0..n).map(|i| inv[(i, 0)]).collect();
    Ok(WeingartenTable {
        m,
        d,
        perms,
        values,
    })
}

/// Multi-index digits of `x` in base `d` over `n` positions, most significant first.
fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = x % d;
        x /= d;
    }
    out
}

fn check_twirl_cap(d: usize, m: usize) -> Result<usize> {
    let dim = d
        .checked_pow(m as u32)
        .ok_or(Error::Overflow("twirl dimension"))?;
    let cap = 256;
    if dim * dim > cap * cap {
        return Err(Error::CapExceeded {
            what: "twirl operator dimension",
            needed: dim * dim,
            cap: cap * cap,
        });
    }
    Ok(dim)
}

/// Haar average `E[U^{(x)m} (x) conj(U)^{(x)m}]` as a `d^{2m} x d^{2m}` matrix.
///
/// Rows carry `(a_1..a_m, a'_1..a'_m)` and columns `(b_1..b_m, b'_1..b'_m)`, so
/// the entry is `E[prod U_{a_i b_i} conj(U_{a'_i b'_i})]`.
pub fn haar_twirl_exact(d: usize, m: usize) -> Result<ComplexMatrix> {
    let dim = check_twirl_cap(d, m)?;
    let wg = weingarten(m, d)?;
    let perms = wg.perms().to_vec();
    let n = dim * dim;
    let mut out = ComplexMatrix::zeros(n, n);
    for row in 0..n {
        let (a, ap) = (digits(row / dim, d, m), digits(row % dim, d, m));
        for col in 0..n {
            let (b, bp) = (digits(col / dim, d, m), digits(col % dim, d, m));
            let mut s = 0.0;
            for sigma in &perms {
                if !(0..m).all(|i| a[i] == ap[sigma.apply(i)]) {
                    continue;
                }
                for tau in &perms {
                    if (0..m).all(|i| b[i] == bp[tau.apply(i)]) {
                        s += wg.value(&sigma.compose(&tau.inverse()));
                    }
                }
            }
            out[(row, col)] = C64::new(s, 0.0);
        }
    }
    Ok(out)
}

/// Monte-Carlo estimate of [`haar_twirl_exact`] from `samples` seeded Haar unitaries.
pub fn haar_twirl_mc(d: usize, m: usize, samples: usize, seed: u64) -> Result<ComplexMatrix> {
    let dim = check_twirl_cap(d, m)?;
    let n = dim * dim;
    let mut acc = vec![ZERO; n * n];
    for s in 0..samples {
        let u = haar_unitary(d, seed.wrapping_add(s as u64))?;
        let mut power = ComplexMatrix::identity(1);
        for _ in 0..m {
            power = power.kron(&u);
        }
        let full = power.kron(&power.conj());
        for (x, y) in acc.iter_mut().zip(full.data()) {
            *x += y;
        }
    }
    let scale = 1.0 / samples.max(1) as f64;
    ComplexMatrix::new(n, n, acc.into_iter().map(|z| z * scale).collect())
}

/// Vectorised permutation operator `P(pi)_{a, a'} = prod_i delta(a_i, a'_{pi(i)})` on `d^{2m}` entries.
pub fn permutation_vector(p: &Permutation, d: usize) -> Vec<C64> {
    let m = p.degree();
    let dim = d.pow(m as u32);
    let mut v = vec![ZERO; dim * dim];
    for a in 0..dim {
        let ad = digits(a, d, m);
        let mut ap = vec![0; m];
        for i in 0..m {
            ap[p.apply(i)] = ad[i];
        }
        let ap_idx = ap.iter().fold(0, |acc, &x| acc * d + x);
        v[a * dim + ap_idx] = C64::new(1.0, 0.0);
    }
    v
}
