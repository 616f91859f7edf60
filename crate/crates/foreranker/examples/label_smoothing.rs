//! Label smoothing as a fixed-rate alternative to peer distillation.
//!
//! Smoothed targets mix the one-hot click label with a uniform distribution
//! at rate γ; the cross-entropy against them reduces to plain NLL at γ = 0.
//! Peer distillation plays a similar regularizing role, but its soft targets
//! are context-dependent instead of a global constant.
//!
//! Run: `cargo run --example label_smoothing`

use foreranker::objectives::{label_smooth_targets, nll_loss, smoothed_ce_loss};

fn main() {
    let labels = [false, true, false, false, false];
    let scores = [0.2, 1.4, -0.3, 0.8, -1.1];

    println!("click labels: {labels:?}");
    println!("model scores: {scores:?}\n");

    for gamma in [0.0, 0.1, 0.2] {
        let targets = label_smooth_targets(&labels, gamma).unwrap();
        let loss = smoothed_ce_loss(&scores, &targets).unwrap();
        println!("gamma {gamma:.1}: targets {targets:?}");
        println!("           cross-entropy {loss:.6}");
    }

    let nll = nll_loss(&scores, 1).unwrap();
    let zero_gamma = smoothed_ce_loss(&scores, &label_smooth_targets(&labels, 0.0).unwrap());
    println!("\nplain NLL = {nll:.6}; smoothed CE at gamma 0 = {:.6}", zero_gamma.unwrap());
}
