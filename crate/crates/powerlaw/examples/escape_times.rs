//! Mean escape times: polynomial barrier dependence under state-dependent
//! noise versus the exponential Kramers law, versus alpha-stable jumps.
//!
//! Run with: cargo run --example escape_times

use powerlaw::escape::{
    tau_alpha_stable_1d, tau_langevin_1d, tau_power_law_1d, EscapeProblem1D,
};
use powerlaw::landscape::DoubleWell1D;

fn main() {
    let eta = 0.025;
    let sigma_g = 0.2;
    let kappa = 2.0;
    let (h_a, h_b) = (1.0, 1.0);
    let alpha = 1.0;

    let unit = eta * sigma_g; // barrier heights in units of eta*sigma_g
    println!("barriers in units of eta*sigma_g = {unit}");
    println!();
    println!("dL/unit   tau_power_law   tau_langevin    tau_stable(a=1)   langevin/power");
    for mult in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let delta_l = mult * unit;
        let p = EscapeProblem1D::new(h_a, h_b, delta_l, eta, sigma_g, kappa).unwrap();
        let tau_pl = tau_power_law_1d(&p).unwrap();
        let tau_lv = tau_langevin_1d(h_a, h_b, delta_l, eta, sigma_g).unwrap();
        let width = DoubleWell1D::new(0.0, h_a, h_b, delta_l).unwrap().barrier_width();
        let tau_st = tau_alpha_stable_1d(alpha, eta, sigma_g, width).unwrap();
        println!(
            "{mult:<9} {tau_pl:<15.4} {tau_lv:<15.4} {tau_st:<17.4} {:.4}",
            tau_lv / tau_pl
        );
    }
    println!();
    println!("the power-law time grows like (1 + 2 dL/(kappa eta sigma_g))^(kappa - 1/2),");
    println!("polynomial in the barrier; the Langevin time grows like exp(2 dL/(eta sigma_g)).");
    println!("so the ratio increases without bound: tall barriers stop trapping the dynamic.");
}
