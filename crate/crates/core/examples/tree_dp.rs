use std::time::Instant;

use dbfraud::fraud::{expected_max_tree, FraudLimits};

fn main() {
    let max: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    for n in 1..=max {
        let t = Instant::now();
        let a = expected_max_tree(n, &FraudLimits::default()).expect("within limits");
        println!(
            "n={n:2} E={:.10} p={:.10} ({:.2?})",
            a.expected_max.to_f64(),
            a.expected_max.to_f64() / 2f64.powi(n as i32),
            t.elapsed()
        );
    }
}
