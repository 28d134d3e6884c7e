use bergman_lab::expansion::diag_expansion;
use bergman_lab::{BergmanSpace, ReproducingKernel, Weight};
use num_complex::Complex64;

fn main() {
    let weight = Weight::quartic(0.1).unwrap();
    let z = Complex64::new(0.3, 0.0);
    for m in [16.0, 32.0, 64.0, 128.0] {
        let n = m as usize;
        let space = BergmanSpace::radial(&weight, m, n).unwrap();
        let exact = space.one_point(z);
        let approx = diag_expansion(&weight, m, z).unwrap();
        println!("m={m:>4} one_point={exact:.8} expansion={approx:.8} m*residual={:.4e}", m * (exact - approx).abs());
    }
}
