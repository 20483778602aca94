//! What happens when the stability constant and loss scale are guessed
//! wrong: the variance bound computed with the guesses is inflated by at
//! most a closed-form factor.
//!
//! ```text
//! cargo run --example misspecification
//! ```

use oeuvre::estimator::{gamma_optimal, misspecification_factor, variance_step};

fn main() -> oeuvre::error::Result<()> {
    let (c, b) = (1.0, 1.0);
    println!("{:>6} {:>6} {:>10} {:>10}", "c_hat", "b_hat", "worst", "bound");
    for (c_hat, b_hat) in [(1.0, 1.0), (0.5, 1.0), (1.0, 0.5), (0.25, 0.5), (2.0, 2.0)] {
        let factor = misspecification_factor(c, c_hat, b, b_hat)?;
        let (mut v, mut v_hat) = (b * b, b_hat * b_hat);
        let mut worst: f64 = 1.0;
        for t in 2..=5000u64 {
            let rate = 1.0 / (t as f64).sqrt();
            let g = gamma_optimal(v_hat, c_hat * rate, b_hat)?;
            v = variance_step(v, g, c * rate, b)?;
            v_hat = variance_step(v_hat, g, c_hat * rate, b_hat)?;
            worst = worst.max(v / v_hat);
        }
        println!("{c_hat:>6} {b_hat:>6} {worst:>10.4} {factor:>10.4}");
    }
    Ok(())
}
