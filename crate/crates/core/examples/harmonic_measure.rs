use bergman_lab::fock::{th5_experiment, th5_test_function, DegreeRule, HarmonicMeasureSpec};
use num_complex::Complex64;

fn main() {
    let spec = HarmonicMeasureSpec::new(1.0, Complex64::new(1.5, 0.0), 512).unwrap();
    let f = th5_test_function(1.0);
    let ms = [16.0, 32.0, 64.0, 128.0, 256.0];
    for rule in [DegreeRule::RoundMTau, DegreeRule::MTauPlusSqrtM] {
        for row in th5_experiment(&spec, f, &ms, rule).unwrap() {
            println!("{rule:?} m={:>3} n={:>3} berezin={:.6} harmonic={:.6} gap={:.3e}", row.m, row.n, row.berezin, row.harmonic, row.gap);
        }
    }
}
