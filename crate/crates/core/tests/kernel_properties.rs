use approx::assert_relative_eq;
use bergman_lab::berezin::BerezinEvaluator;
use bergman_lab::fock::{fock_kernel, FockKernel};
use bergman_lab::{BergmanSpace, ReproducingKernel, Weight};
use num_complex::Complex64;
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(s, t)| Complex64::from_polar(s, t))
}

#[test]
fn reproducing_property_by_quadrature() {
    // <K(., w), K(., z)> = K(z, w)
    let weight = Weight::quartic(0.1).unwrap();
    let (m, n) = (6.0, 6);
    let space = BergmanSpace::radial(&weight, m, n).unwrap();
    let quad = BergmanSpace::default_quadrature(&weight, m, n);
    let z = Complex64::new(0.3, -0.4);
    let w = Complex64::new(-0.5, 0.1);
    let inner = quad.integrate_complex(|u| space.kernel(u, w) * space.kernel(u, z).conj() * (-m * weight.q(u)).exp());
    let direct = space.kernel(z, w);
    assert_relative_eq!(inner.re, direct.re, max_relative = 1e-9);
    assert_relative_eq!(inner.im, direct.im, epsilon = 1e-9 * direct.norm());
}

#[test]
fn fock_exact_values() {
    // K_{m,1} = m and K_{m,2}(z,w) = m(1 + m z w̄)
    let z = Complex64::new(0.2, 0.5);
    let w = Complex64::new(-1.0, 0.3);
    assert_relative_eq!(fock_kernel(3.0, 1, z, w).unwrap().re, 3.0, max_relative = 1e-14);
    let two = fock_kernel(3.0, 2, z, w).unwrap();
    let want = 3.0 * (1.0 + 3.0 * z * w.conj());
    assert_relative_eq!(two.re, want.re, max_relative = 1e-13);
    assert_relative_eq!(two.im, want.im, max_relative = 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_hermitian(z in point(2.0), w in point(2.0)) {
        let space = BergmanSpace::radial(&Weight::quartic(0.2).unwrap(), 12.0, 12).unwrap();
        let a = space.kernel(z, w);
        let b = space.kernel(w, z).conj();
        prop_assert!((a - b).norm() <= 1e-12 * (a.norm() + 1.0));
    }

    #[test]
    fn radial_and_gram_routes_agree(z in point(1.2), w in point(1.2)) {
        let weight = Weight::quartic(0.1).unwrap();
        let (m, n) = (8.0, 8);
        let radial = BergmanSpace::radial(&weight, m, n).unwrap();
        let gram = BergmanSpace::gram(&weight, m, n, &BergmanSpace::default_quadrature(&weight, m, n)).unwrap();
        let scale = (radial.kernel(z, z).re * radial.kernel(w, w).re).sqrt();
        prop_assert!((radial.kernel(z, w) - gram.kernel(z, w)).norm() <= 1e-10 * scale);
    }

    #[test]
    fn one_point_grows_with_degree(z in point(2.0), n in 1usize..40) {
        let a = FockKernel::new(10.0, n).unwrap().one_point(z);
        let b = FockKernel::new(10.0, n + 1).unwrap().one_point(z);
        prop_assert!(b >= a * (1.0 - 1e-14));
    }

    #[test]
    fn cauchy_schwarz(z in point(2.0), w in point(2.0), n in 1usize..30) {
        let k = FockKernel::new(6.0, n).unwrap();
        let lhs = k.weighted_kernel(z, w).abs();
        prop_assert!(lhs <= (k.one_point(z) * k.one_point(w)).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn berezin_density_is_a_probability(z0 in point(1.0), n in 2usize..24) {
        let k = FockKernel::new(12.0, n).unwrap();
        let ev = BerezinEvaluator::new(&k, z0).unwrap();
        prop_assert!((ev.mass(&ev.default_quadrature()) - 1.0).abs() < 1e-8);
    }
}
