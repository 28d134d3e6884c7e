use bergman_lab::expansion::offdiag_profile;
use bergman_lab::potential::{equilibrium, GridSpec};
use bergman_lab::{BergmanSpace, Weight};
use num_complex::Complex64;

fn main() {
    let weight = Weight::quartic(0.1).unwrap();
    let eq = equilibrium(&weight, 1.0, &GridSpec::default()).unwrap();
    let distances: Vec<f64> = (1..=30).map(|i| i as f64 * 0.05).collect();
    for m in [16.0, 32.0, 64.0] {
        let space = BergmanSpace::radial(&weight, m, m as usize).unwrap();
        let rep = offdiag_profile(&space, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &distances, &eq).unwrap();
        println!("m={m:>3} slope={:.4} slope/sqrt(m)={:.4}", rep.fitted_slope, rep.fitted_slope / m.sqrt());
    }
}
