//! PAC-Bayes generalization bound for the heavy-tailed stationary posterior.
//!
//! Run with: cargo run --example pac_bayes_bound

use nalgebra::DMatrix;
use powerlaw::pacbayes::{generalization_bound, kl_exact_form, kl_upper_bound, BoundInputs};

fn main() {
    // the calibrated case: every term vanishes
    let trivial = BoundInputs {
        hessian: DMatrix::identity(1, 1),
        sigma_g_mat: DMatrix::identity(1, 1),
        eta: 2.0,
        kappa: 5.0,
        dim: 1,
        n_samples: 1000,
        delta: 0.05,
        empirical_risk: 0.0,
    };
    println!(
        "d=1, eta=2, H=Sigma_g=1:  KL upper bound = {}",
        kl_upper_bound(&trivial).unwrap()
    );

    // sharp two-dimensional minimum
    let inputs = BoundInputs {
        hessian: DMatrix::from_row_slice(2, 2, &[4.0, 0.5, 0.5, 2.0]),
        sigma_g_mat: DMatrix::identity(2, 2) * 0.5,
        eta: 0.1,
        kappa: 3.0,
        dim: 2,
        n_samples: 10_000,
        delta: 0.05,
        empirical_risk: 0.08,
    };
    let upper = kl_upper_bound(&inputs).unwrap();
    let exact = kl_exact_form(&inputs).unwrap();
    println!();
    println!("2-d example: KL exact form = {exact:.6}, upper bound = {upper:.6}");
    println!("(the Gamma-free bound is never below the exact form)");

    println!();
    println!("risk bound vs sample count (risk = {}):", inputs.empirical_risk);
    for n in [100u64, 1_000, 10_000, 100_000] {
        let mut at_n = inputs.clone();
        at_n.n_samples = n;
        println!("  n = {n:<7} bound = {:.4}", generalization_bound(&at_n).unwrap());
    }
}
