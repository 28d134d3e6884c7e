use approx::assert_relative_eq;
use bergman_lab::dbar::strict_floor;
use bergman_lab::numerics::{gauss_legendre, ln_factorial, trunc_exp_log, LineRule, LogValue, PlanarQuadrature};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn truncated_exponential_oracle() {
    // E_10(50) = Σ_{k≤10} 50^k/k!, all terms positive
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=10 {
        term *= 50.0 / k as f64;
        sum += term;
    }
    assert_relative_eq!(trunc_exp_log(10, 50.0).to_f64(), sum, max_relative = 1e-13);
    // far beyond f64 range it stays finite in log form
    let big = trunc_exp_log(2000, 1500.0);
    assert!(big.log_magnitude.is_finite() && big.log_magnitude > 709.0);
}

#[test]
fn factorials() {
    assert_relative_eq!(ln_factorial(10).exp(), 3_628_800.0, max_relative = 1e-13);
    assert_eq!(ln_factorial(0), 0.0);
}

#[test]
fn log_values_multiply_and_sum() {
    let a = LogValue::from_complex(Complex64::new(3.0, -4.0));
    let b = LogValue::from_real(-2.0);
    let p = (a * b).to_complex();
    assert_relative_eq!(p.re, -6.0, max_relative = 1e-14);
    assert_relative_eq!(p.im, 8.0, max_relative = 1e-14);
    let s = LogValue::sum([a, b]).to_complex();
    assert_relative_eq!(s.re, 1.0, max_relative = 1e-14);
}

#[test]
fn strict_floor_cases() {
    assert_eq!(strict_floor(3.0), 2);
    assert_eq!(strict_floor(3.5), 3);
    assert_eq!(strict_floor(-0.5), -1);
    assert_eq!(strict_floor(0.0), -1);
}

proptest! {
    #[test]
    fn gauss_legendre_is_exact(n in 2usize..20, coeffs in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let degree = (2 * n - 1).min(coeffs.len() - 1);
        let (x, w) = gauss_legendre(n);
        let p = |t: f64| coeffs[..=degree].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let got: f64 = x.iter().zip(&w).map(|(t, wt)| wt * p(*t)).sum();
        let want: f64 = coeffs[..=degree].iter().enumerate().map(|(k, c)| if k % 2 == 0 { 2.0 * c / (k + 1) as f64 } else { 0.0 }).sum();
        prop_assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn radial_rule_integrates_monomials(k in 0u32..20, r in 0.5f64..3.0) {
        // ∫_{D(0,r)} |z|^{2k} dA = r^{2k+2}/(k+1)
        let quad = PlanarQuadrature::radial(r, 24, 8).unwrap();
        let got = quad.integrate(|z| z.norm_sqr().powi(k as i32));
        let want = r.powi(2 * k as i32 + 2) / (k + 1) as f64;
        prop_assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn angular_modes_cancel(j in 1i32..12, panels in 1usize..6) {
        let rule = LineRule::uniform(0.5, 2.0, panels, 8);
        let quad = PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, 64);
        prop_assert!(quad.integrate_complex(|z| z.powi(j)).norm() < 1e-12);
    }

    #[test]
    fn strict_floor_is_strict(x in -1e6f64..1e6) {
        let f = strict_floor(x) as f64;
        prop_assert!(f < x && x <= f + 1.0);
    }
}
