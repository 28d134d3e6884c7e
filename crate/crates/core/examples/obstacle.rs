use bergman_lab::potential::{psor_obstacle_solve, radial_droplet_radius, GridSpec};
use bergman_lab::Weight;
use num_complex::Complex64;

fn main() {
    let spec = GridSpec { spacing: 0.04, ..GridSpec::default() };

    let fock = psor_obstacle_solve(&Weight::fock(), 1.0, &spec).unwrap();
    println!("fock: radius {:.4} (exact 1), mass {:.6}", fock.radius_estimate(), fock.diagnostics().mass);

    let p2 = Weight::radial_power(2).unwrap();
    let eq = psor_obstacle_solve(&p2, 1.0, &spec).unwrap();
    println!("|z|^4: radius {:.4} (exact {:.4})", eq.radius_estimate(), radial_droplet_radius(&p2, 1.0).unwrap());

    // semi-axes sqrt((1+t)/(1-t)) ~ 1.528 and its reciprocal ~ 0.655
    let t = 0.4;
    let eq = psor_obstacle_solve(&Weight::elliptic(t).unwrap(), 1.0, &spec).unwrap();
    for z in [Complex64::new(1.45, 0.0), Complex64::new(1.6, 0.0), Complex64::new(0.0, 0.6), Complex64::new(0.0, 0.72)] {
        println!("elliptic t={t}: {z} in droplet: {}", eq.contains(z));
    }
}
