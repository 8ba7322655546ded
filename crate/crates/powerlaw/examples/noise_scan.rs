//! Measures how the minibatch gradient-noise covariance trace varies along
//! a line through the empirical minimum of the toy loss.
//!
//! Run with: cargo run --example noise_scan
//!
//! The trace should be smallest at the minimum and grow quadratically with
//! the offset: that curvature is what produces the power-law tails.

use powerlaw::landscape::EmpiricalToyLoss;
use powerlaw::noise::scan_noise_trace;

fn main() {
    let toy = EmpiricalToyLoss::generate(400, 0.02, 3, 1.0).unwrap();
    let center = toy.empirical_minimum(0.5, 1.5).unwrap();
    let offsets: Vec<f64> = (0..9).map(|i| -0.05 + 0.0125 * i as f64).collect();

    let scan = scan_noise_trace(&toy, &center, &[1.0, 0.0], &offsets, 4, 1000, 99).unwrap();

    println!("scan through ({:.4}, {:.4}) along (1, 0)", center[0], center[1]);
    println!();
    println!("offset     trace");
    for (o, t) in scan.offsets.iter().zip(&scan.traces) {
        println!("{o:>7.4}   {t:.6e}");
    }
    println!();
    let [c0, c1, c2] = scan.quad_coeffs;
    println!("quadratic fit: {c0:.3e} + {c1:.3e} x + {c2:.3e} x^2");
    println!("R^2 = {:.4}", scan.r_squared);
    println!("fitted argmin offset = {:+.5}", scan.argmin_offset);
}
