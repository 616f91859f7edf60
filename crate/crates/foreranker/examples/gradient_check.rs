//! Finite-difference verification of the encoder's analytic gradients.
//!
//! Builds a tiny random model, backpropagates the score of one input, and
//! compares every parameter's analytic gradient against central finite
//! differences in double precision.
//!
//! Run: `cargo run --example gradient_check`

use foreranker::corpus::{InputVariant, SerializedInput};
use foreranker::encoder::{backward, encode_score, forward, init_params, ArchConfig, ModelParams};

fn main() {
    let arch = ArchConfig {
        vocab_size: 24,
        max_len: 24,
        d_model: 8,
        n_layers: 2,
        n_heads: 2,
        d_ff: 16,
        head_hidden: 8,
    };
    let params = init_params::<f64>(&arch, 42).expect("valid arch");
    println!("model: {} parameters", params.param_count());

    let input = SerializedInput {
        token_ids: vec![2, 5, 9, 14, 3, 7, 11, 3],
        variant: InputVariant::HistoryOnly,
    };

    let cache = forward(&params, &input).expect("forward");
    println!("score: {:+.6}", cache.score);

    let mut grads = ModelParams::<f64>::zeros(&arch);
    backward(&params, &cache, 1.0, &mut grads);
    let analytic = grads.to_flat();

    let step = 1e-5;
    let flat = params.to_flat();
    let mut scratch = params.clone();
    let mut worst = (0.0f64, 0usize);
    for i in 0..flat.len() {
        let mut probe = flat.clone();
        probe[i] += step;
        scratch.copy_from_flat(&probe);
        let up = encode_score(&scratch, &input).unwrap();
        probe[i] -= 2.0 * step;
        scratch.copy_from_flat(&probe);
        let down = encode_score(&scratch, &input).unwrap();
        let fd = (up - down) / (2.0 * step);
        let rel = (analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1e-6);
        if rel > worst.0 {
            worst = (rel, i);
        }
    }

    println!(
        "max relative error over {} parameters: {:.3e} (at index {})",
        flat.len(),
        worst.0,
        worst.1
    );
    assert!(worst.0 < 1e-4, "gradients disagree with finite differences");
    println!("analytic gradients agree with finite differences (< 1e-4)");
}
