mod common;

use common::{random_square, rel_diff};
use permbound::matrix::{diag_congruence, random_psd, CMatrix, HermitianMatrix};
use permbound::permanent::{per_naive, per_psd_log, per_ryser, per_tensor, LogNonneg};
use permbound::rng::Stream;
use proptest::prelude::*;

#[test]
fn psd_permanents_are_nonnegative() {
    let mut rng = Stream::new(21);
    for i in 0..500 {
        let n = 1 + i % 12;
        let a = random_psd(n, 1 + (i / 12) % n, &mut rng);
        let p = per_psd_log(&a).unwrap();
        assert!(p.is_zero || p.log_value.is_finite());
    }
}

#[test]
fn tensor_identity_matches_ryser() {
    let mut rng = Stream::new(22);
    for n in 2..=4 {
        for _ in 0..20 {
            let m = random_square(n, &mut rng);
            let (t, r) = (per_tensor(&m).unwrap(), per_ryser(&m).unwrap());
            assert!((t - r).norm() <= 1e-10 * r.norm().max(1.0));
        }
    }
}

#[test]
fn log_domain_survives_huge_scales() {
    let a = HermitianMatrix::diagonal(&[1e200; 5]).unwrap();
    let p = per_psd_log(&a).unwrap();
    assert!((p.ln() - 5.0 * 200.0 * 10f64.ln()).abs() < 1e-9);
    assert_eq!(p.approx_string(), None);
    assert_eq!(LogNonneg::from_linear(0.0).approx_string().as_deref(), Some("≈ 0"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn congruence_shifts_log_permanent(seed in any::<u64>(), n in 1usize..9, logs in prop::collection::vec(-2.0f64..2.0, 9)) {
        let mut rng = Stream::new(seed);
        let a = random_psd(n, 1 + (seed as usize) % n, &mut rng);
        let lambda: Vec<f64> = logs[..n].iter().map(|l| l.exp()).collect();
        let scaled = diag_congruence(&a, &lambda).unwrap();
        let (p, q) = (per_psd_log(&a).unwrap(), per_psd_log(&scaled).unwrap());
        if !p.is_zero {
            let shift: f64 = 2.0 * logs[..n].iter().sum::<f64>();
            prop_assert!((q.ln() - p.ln() - shift).abs() <= 1e-9 * (1.0 + p.ln().abs()));
        }
    }

    #[test]
    fn naive_and_ryser_agree(seed in any::<u64>(), n in 1usize..8) {
        let m = random_square(n, &mut Stream::new(seed));
        let (a, b) = (per_naive(&m).unwrap(), per_ryser(&m).unwrap());
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(b.norm()));
    }

    #[test]
    fn real_permanent_of_psd_is_real(seed in any::<u64>(), n in 1usize..8) {
        let a = random_psd(n, n, &mut Stream::new(seed));
        let p = per_ryser(a.as_matrix()).unwrap();
        prop_assert!(p.im.abs() <= 1e-9 * p.norm());
        prop_assert!(rel_diff(per_psd_log(&a).unwrap().to_linear(), p.re) <= 1e-9);
    }
}

#[test]
fn size_gates() {
    assert!(per_naive(&CMatrix::identity(10, 10)).is_err());
    assert!(per_tensor(&CMatrix::identity(5, 5)).is_err());
    assert!(per_ryser(&CMatrix::identity(25, 25)).is_err());
}
