//! Randomized size-strain round trips through synthetic scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tio2kit::xrdfit::{breadths_for, fit_voigt, size_strain, synthetic_scan, VoigtPeak, CU_KA1};

#[test]
fn hundred_random_round_trips_stay_within_their_error_bars() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut pulls = Vec::new();
    for case in 0..100u64 {
        let tau = rng.gen_range(10.0..60.0);
        let eps = rng.gen_range(0.1..0.8);
        let tt = rng.gen_range(20.0..80.0);
        let (g, l) = breadths_for(tau, eps, tt, CU_KA1, 0.9);
        // flat background keeps the zero clip of the noise out of the tails
        let truth = VoigtPeak { offset: 50.0, ..VoigtPeak::exact(tt, g, l, 1000.0) };
        let half = 6.0 * (g + l);
        let w = (tt - half, tt + half);
        // SNR 500, about 40 samples per FWHM
        let scan = synthetic_scan(&truth, w, 481, 2.0, case);
        let s = size_strain(&fit_voigt(&scan, w).unwrap(), CU_KA1, 0.9).unwrap();
        let pt = (s.tau_nm - tau) / s.tau_err_nm;
        let pe = (s.epsilon_pct - eps) / s.epsilon_err_pct;
        assert!(pt.abs() < 4.5 && pe.abs() < 4.5, "case {case}: tau {tau:.2}->{:.2}+-{:.2}, eps {eps:.3}->{:.3}+-{:.3}", s.tau_nm, s.tau_err_nm, s.epsilon_pct, s.epsilon_err_pct);
        pulls.push(pt);
        pulls.push(pe);
    }
    let n = pulls.len() as f64;
    let mean = pulls.iter().sum::<f64>() / n;
    let sd = (pulls.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    // error bars neither hide bias nor overstate spread
    assert!(mean.abs() < 0.3, "pull mean {mean}");
    assert!(sd > 0.7 && sd < 1.4, "pull sd {sd}");
}

#[test]
fn noiseless_round_trips_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let tau = rng.gen_range(10.0..100.0);
        let eps = rng.gen_range(0.05..0.8);
        let tt = rng.gen_range(20.0..80.0);
        let (g, l) = breadths_for(tau, eps, tt, CU_KA1, 0.9);
        let half = 6.0 * (g + l);
        let scan = synthetic_scan(&VoigtPeak::exact(tt, g, l, 1000.0), (tt - half, tt + half), 401, 0.0, 0);
        let s = size_strain(&fit_voigt(&scan, (tt - half, tt + half)).unwrap(), CU_KA1, 0.9).unwrap();
        assert!((s.tau_nm / tau - 1.0).abs() < 1e-4, "{tau} -> {}", s.tau_nm);
        assert!((s.epsilon_pct / eps - 1.0).abs() < 1e-4, "{eps} -> {}", s.epsilon_pct);
    }
}
