use bergman_lab::fock::{pv_moment, pv_moment_quadrature, restricted_moment, szego_relative_error};
use num_complex::Complex64;

fn main() {
    let z0 = Complex64::new(1.5, 0.0);
    for j in [1, 2] {
        let closed = pv_moment(10.0, 12, j, z0).unwrap().value;
        let quad = pv_moment_quadrature(10.0, 12, j, z0).unwrap().value;
        let disk = restricted_moment(10.0, 12, j, z0, 1.0).unwrap().value;
        println!("j={j} closed={closed:.10} quadrature={quad:.10} over D(0,1)={disk:.6}");
    }
    for l in [50, 100, 200, 400, 800] {
        println!("szego l={l:>3} relative error {:.3e}", szego_relative_error(l, 2.0).unwrap());
    }
}
