use dualdesign::combinatorics::{rising_factorial, stirling_first, weingarten, Permutation};

#[test]
fn weingarten_sum_rule() {
    for d in [4, 8, 16] {
        for m in 1..=4 {
            let wg = weingarten(m, d).unwrap();
            let sum: f64 = wg.values().iter().sum();
            let expected = 1.0 / rising_factorial(d as u64, m as u64).unwrap() as f64;
            assert!((sum - expected).abs() <= 1e-12, "d = {d}, m = {m}");
        }
    }
}

#[test]
fn cycle_census_matches_stirling_numbers() {
    for m in 1..=6 {
        let mut census = vec![0u64; m + 1];
        for p in Permutation::all(m) {
            census[p.cycle_count()] += 1;
        }
        for (l, count) in census.iter().enumerate() {
            assert_eq!(*count, stirling_first(m, l), "m = {m}, l = {l}");
        }
    }
}

#[test]
fn cycle_generating_function_is_a_rising_factorial() {
    for q in [2u64, 3] {
        for n_a in 1..=4u32 {
            let d = q.pow(n_a);
            for k in 1..=4 {
                let sum: u64 = Permutation::all(k)
                    .iter()
                    .map(|p| d.pow(p.cycle_count() as u32))
                    .sum();
                assert_eq!(sum, rising_factorial(d, k as u64).unwrap());
            }
        }
    }
}

#[test]
fn weingarten_rejects_small_dimension() {
    assert!(weingarten(3, 2).is_err());
}
