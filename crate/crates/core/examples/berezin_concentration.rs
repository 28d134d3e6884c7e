use bergman_lab::berezin::BerezinEvaluator;
use bergman_lab::experiment::split_quadrature;
use bergman_lab::fock::FockKernel;
use bergman_lab::Weight;
use num_complex::Complex64;

fn main() {
    let z0 = Complex64::new(0.5, 0.0);
    for m in [10.0, 20.0, 40.0, 80.0] {
        let n = m as usize;
        let kernel = FockKernel::new(m, n).unwrap();
        let ev = BerezinEvaluator::new(&kernel, z0).unwrap();
        let r_max = Weight::fock().truncation_radius(m, n, 40.0) + 1.0;
        let quad = split_quadrature(m, 1.2, r_max, 12, 1024);
        let mass = ev.mass(&quad);
        let outside = ev.mass_outside(|z| z.norm() > 1.2, &quad);
        println!("m={m:>3} mass={mass:.10} outside |z|>1.2: {outside:.3e}");
    }
}
