//! Brick-wall circuits with closed boundaries acting on full state vectors.

use serde::{Deserialize, Serialize};

use crate::biunitary::Gate;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::states::StateVector;

/// Which pairs the first layer of every time step acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Pairs `(0,1), (2,3), ...` first, then `(1,2), (3,4), ...`.
    #[default]
    OddFirst,
    /// Pairs `(1,2), (3,4), ...` first.
    EvenFirst,
}

#[derive(Clone, Debug)]
pub enum GateAssignment {
    /// The same gate everywhere.
    Floquet(Gate),
    /// `table[layer][j]` acts on the `j`-th pair of that layer; layers count from 0 over all `2t` layers.
    Table(Vec<Vec<Gate>>),
    /// Independent Haar-random gates drawn from the spec's seed.
    RandomHaar,
}

#[derive(Clone, Debug)]
pub struct CircuitSpec {
    pub n: usize,
    pub q: usize,
    pub t: usize,
    pub layout: Layout,
    pub gates: GateAssignment,
    pub seed: u64,
}

impl CircuitSpec {
    pub fn floquet(n: usize, t: usize, gate: Gate) -> Self {
        Self {
            n,
            q: gate.q(),
            t,
            layout: Layout::OddFirst,
            gates: GateAssignment::Floquet(gate),
            seed: 0,
        }
    }

    /// Left sites of the gates in layer `layer` (0-based over all layers).
    pub fn layer_sites(&self, layer: usize) -> Vec<usize> {
        let first = match self.layout {
            Layout::OddFirst => layer % 2,
            Layout::EvenFirst => 1 - layer % 2,
        };
        (first..self.n.saturating_sub(1)).step_by(2).collect()
    }

    fn gate_at(&self, layer: usize, j: usize) -> Result<Gate> {
        match &self.gates {
            GateAssignment::Floquet(g) => Ok(g.clone()),
            GateAssignment::Table(table) => table
                .get(layer)
                .and_then(|row| row.get(j))
                .cloned()
                .ok_or_else(|| {
                    Error::Config(format!(
                        "gate table has no entry for layer {layer}, position {j}"
                    ))
                }),
            GateAssignment::RandomHaar => {
                let idx = (layer * self.n + j) as u64;
                Gate::haar_random(
                    self.q,
                    self.seed
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(idx),
                )
            }
        }
    }
}

/// Applies `g` to sites `(site, site + 1)` in place.
pub fn apply_two_site_gate(state: &mut StateVector, g: &Gate, site: usize) -> Result<()> {
    let (n, q) = (state.n(), state.q());
    if g.q() != q {
        return Err(Error::Shape(format!(
            "gate dimension {} on sites of dimension {q}",
            g.q()
        )));
    }
    if site + 1 >= n {
        return Err(Error::OutOfRange(format!("gate at site {site} of {n}")));
    }
    let qq = q * q;
    let right = q.pow((n - site - 2) as u32);
    let left = q.pow(site as u32);
    let m = g.matrix().data();
    let amps = state.amplitudes_mut();
    let mut buf_in = vec![ZERO; qq];
    let mut buf_out = vec![ZERO; qq];
    for l in 0..left {
        let base = l * qq * right;
        for r in 0..right {
            for (k, x) in buf_in.iter_mut().enumerate() {
                *x = amps[base + k * right + r];
            }
            for (row, y) in buf_out.iter_mut().enumerate() {
                let coeffs = &m[row * qq..(row + 1) * qq];
                *y = coeffs.iter().zip(&buf_in).map(|(a, b)| a * b).sum::<C64>();
            }
            for (k, y) in buf_out.iter().enumerate() {
                amps[base + k * right + r] = *y;
            }
        }
    }
    Ok(())
}

/// `t` time steps of two layers each.
pub fn brickwall_evolve(state: &StateVector, spec: &CircuitSpec) -> Result<StateVector> {
    if state.n() != spec.n || state.q() != spec.q {
        return Err(Error::Shape(format!(
            "circuit for {} sites of dimension {}, state has {} of dimension {}",
            spec.n,
            spec.q,
            state.n(),
            state.q()
        )));
    }
    let mut out = state.clone();
    for layer in 0..2 * spec.t {
        for (j, site) in spec.layer_sites(layer).into_iter().enumerate() {
            let g = spec.gate_at(layer, j)?;
            apply_two_site_gate(&mut out, &g, site)?;
        }
    }
    Ok(out)
}
