use std::f64::consts::FRAC_PI_4;

use dualdesign::biunitary::kim_gate;
use dualdesign::circuit::{brickwall_evolve, CircuitSpec};
use dualdesign::ensemble::{
    delta_k, delta_k_full, haar_moment, moment_k, project_ensemble, rho_nk, MeasurementScheme, Repr,
};
use dualdesign::states::{computational_product_state, StateVector};

fn evolved(n: usize, t: usize) -> StateVector {
    let g = kim_gate(FRAC_PI_4, FRAC_PI_4, 0.5, 0.5);
    let s = computational_product_state(n, 2, &vec![0; n]).unwrap();
    brickwall_evolve(&s, &CircuitSpec::floquet(n, t, g)).unwrap()
}

fn padded(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    v.resize(len, 0.0);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[test]
fn symmetric_and_full_spectra_agree() {
    for n_a in [1, 2] {
        let d = 1usize << n_a;
        let ens =
            project_ensemble(&evolved(n_a + 6, 1), n_a, &MeasurementScheme::Computational).unwrap();
        for k in [2, 3] {
            let full_dim = d.pow(k as u32);
            let pairs = [
                (
                    moment_k(&ens, k, Repr::Symmetric).unwrap(),
                    moment_k(&ens, k, Repr::Full).unwrap(),
                ),
                (
                    haar_moment(d, k, Repr::Symmetric).unwrap(),
                    haar_moment(d, k, Repr::Full).unwrap(),
                ),
            ];
            for (sym, full) in pairs {
                let a = padded(sym.eigenvalues().unwrap(), full_dim);
                let b = padded(full.eigenvalues().unwrap(), full_dim);
                let err = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10, "d = {d}, k = {k}, err = {err}");
            }
            let gap = (delta_k(&ens, k).unwrap() - delta_k_full(&ens, k).unwrap()).abs();
            assert!(gap < 1e-10);
        }
    }
}

#[test]
fn deltas_are_monotone_in_k() {
    let ens = project_ensemble(&evolved(10, 2), 2, &MeasurementScheme::Computational).unwrap();
    let d: Vec<f64> = (1..=4).map(|k| delta_k(&ens, k).unwrap()).collect();
    assert!(d[0] < 1e-10);
    assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(d.iter().all(|x| (0.0..=1.0).contains(x)));
}

#[test]
fn replica_operator_reduces_to_the_moment_at_n_equal_one_minus_k() {
    let state = evolved(8, 2);
    let rho = rho_nk(&state, 2, &MeasurementScheme::Computational, -1, 2).unwrap();
    let ens = project_ensemble(&state, 2, &MeasurementScheme::Computational).unwrap();
    let moment = moment_k(&ens, 2, Repr::Full).unwrap();
    assert!(rho.max_abs_diff(&moment.matrix) < 1e-12);
    assert!((rho.trace().re - 1.0).abs() < 1e-10);
    let rho1 = rho_nk(&state, 2, &MeasurementScheme::Computational, 1, 2).unwrap();
    assert!(rho1.hermiticity_violation() < 1e-12);
    assert!(rho1.trace().re < 1.0);
}
