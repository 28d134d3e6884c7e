use bergman_lab::fock::fock_kernel;
use bergman_lab::{BergmanSpace, ReproducingKernel, Weight};
use num_complex::Complex64;

fn main() {
    let (m, n) = (10.0, 12);
    let weight = Weight::fock();
    let gram = BergmanSpace::gram(&weight, m, n, &BergmanSpace::default_quadrature(&weight, m, n)).unwrap();
    let z = Complex64::new(0.4, -0.2);
    let w = Complex64::new(-0.1, 0.7);
    println!("closed form   {}", fock_kernel(m, n, z, w).unwrap());
    println!("gram route    {}", gram.kernel(z, w));
    println!("one-point at z {:.6}", gram.one_point(z));
}
