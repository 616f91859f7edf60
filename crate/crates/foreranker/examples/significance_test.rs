//! Paired significance testing with Bonferroni correction.
//!
//! Run: `cargo run --example significance_test`

use foreranker::eval::{bonferroni, paired_t_test};

fn main() {
    // Per-query MAP samples from two hypothetical systems.
    let system_a = [0.81, 0.66, 0.92, 0.45, 0.73, 0.88, 0.59, 0.77, 0.95, 0.61];
    let system_b = [0.74, 0.60, 0.90, 0.44, 0.65, 0.82, 0.55, 0.70, 0.93, 0.58];

    let t = paired_t_test(&system_a, &system_b).unwrap();
    println!("paired t-test over {} queries:", t.n);
    println!("  mean difference: {:+.4}", t.mean_diff);
    println!("  t statistic:     {:.4}", t.t_stat);
    println!("  two-sided p:     {:.6}", t.p_value);
    println!(
        "  Bonferroni (6 comparisons): {:.6}",
        bonferroni(t.p_value, 6)
    );

    // A system compared with itself is never significant.
    let same = paired_t_test(&system_a, &system_a).unwrap();
    println!("\nself-comparison: t = {}, p = {}", same.t_stat, same.p_value);

    // Constant nonzero differences have no variance to test against; the
    // result is flagged instead of erroring.
    let shifted: Vec<f64> = system_a.iter().map(|x| x + 0.05).collect();
    let degen = paired_t_test(&shifted, &system_a).unwrap();
    println!(
        "constant shift: p = {}, degenerate flag = {}",
        degen.p_value, degen.degenerate
    );
}
