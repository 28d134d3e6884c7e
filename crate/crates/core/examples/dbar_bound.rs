use bergman_lab::dbar::{norm_quadrature, verify_cor_bh, DbarBoundParams, SmoothBump};
use bergman_lab::potential::radial_equilibrium;
use bergman_lab::{BergmanSpace, Weight};
use num_complex::Complex64;

fn main() {
    let weight = Weight::quartic(0.1).unwrap();
    let eq = radial_equilibrium(&weight, 1.0).unwrap();
    let bump = SmoothBump::new(Complex64::new(0.0, 0.0), 0.3).unwrap();
    let params = DbarBoundParams::new(1.0, 0.5, &eq, &weight, &bump).unwrap();
    let f_quad = bump.quadrature(60).unwrap();
    for m in [8.0, 16.0, 32.0] {
        let n = m as usize;
        let space = BergmanSpace::radial(&weight, m, n).unwrap();
        let rec = verify_cor_bh(&space, &bump, &params, &eq, &f_quad, &norm_quadrature(&weight, m, n));
        println!("{}", serde_json::to_string(&rec).unwrap());
    }
}
