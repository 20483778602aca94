//! The ADWIN baseline on a stream whose mean jumps halfway through: the
//! window shrinks after the change and then grows again.
//!
//! ```text
//! cargo run --example adwin_window -- [delta]
//! ```

use oeuvre::baselines::Adwin;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(0.002);
    let mut adwin = Adwin::new(delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in 1..=4000u64 {
        let p = if t <= 2000 { 0.3 } else { 0.6 };
        let x = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
        let m = adwin.update(x)?;
        if t % 250 == 0 {
            println!(
                "t={t:<5} mean {m:.3}  width {:<5} buckets {:<3} cuts {}",
                adwin.width(),
                adwin.bucket_count(),
                adwin.cuts()
            );
        }
    }
    Ok(())
}
