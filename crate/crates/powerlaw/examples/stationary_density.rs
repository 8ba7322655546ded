//! Closed-form stationary density of the state-dependent-noise diffusion.
//!
//! Run with: cargo run --example stationary_density
//!
//! The density is a power law p(w) ~ (sigma_g + sigma_H (w - w*)^2)^(-kappa):
//! a Student-t with nu = 2 kappa - 1 degrees of freedom. Small kappa means
//! heavy tails; kappa -> infinity recovers the Gaussian.

use powerlaw::stationary::{normalizer_1d_quadrature, PowerLawKappa1D};

fn main() {
    let sigma_g = 1.0; // noise floor at the minimum
    let sigma_h = 0.5; // quadratic growth of the noise away from it

    println!("kappa    normalizer Z    quadrature Z    tail mass |w|>5");
    for kappa in [0.75, 1.2, 2.0, 4.0, 16.0] {
        let dist = PowerLawKappa1D::new(kappa, sigma_g, sigma_h, 0.0).unwrap();
        let z = dist.normalizer();
        let z_quad = normalizer_1d_quadrature(kappa, sigma_g, sigma_h).unwrap();
        // crude tail mass by densities at a few points, Simpson on [5, 60]
        let tail: f64 = {
            let n = 2048;
            let h = 55.0 / n as f64;
            let mut s = dist.density(5.0) + dist.density(60.0);
            for i in 1..n {
                let w = 5.0 + i as f64 * h;
                s += dist.density(w) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            2.0 * s * h / 3.0 // both tails
        };
        println!("{kappa:<8} {z:<15.10} {z_quad:<15.10} {tail:.3e}");
    }

    println!();
    println!("density profile at kappa = 2 (scale = sqrt(sigma_g / (3 sigma_h))):");
    let dist = PowerLawKappa1D::new(2.0, sigma_g, sigma_h, 0.0).unwrap();
    for w in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        println!("  p({w:>4}) = {:.6}", dist.density(w));
    }
}
