use bergman_lab::berezin::{tv_quadrature, BerezinEvaluator};
use bergman_lab::{BergmanSpace, Weight};
use num_complex::Complex64;

fn main() {
    let weight = Weight::quartic(0.1).unwrap();
    let quad = tv_quadrature();
    for z0 in [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0)] {
        for m in [8.0, 16.0, 32.0, 64.0] {
            let space = BergmanSpace::radial(&weight, m, m as usize).unwrap();
            let ev = BerezinEvaluator::new(&space, z0).unwrap();
            println!("z0={z0} m={m:>3} tv={:.4e}", ev.tv_to_gaussian(&quad).unwrap());
        }
    }
}
