//! Trains the reference CNN on the procedural shapes set and saves its weights.
//!
//! ```text
//! cargo run --release -p ebim --example train_reference -- [out.nnw]
//! ```

use std::time::Instant;

use ebim::model::save_weights;
use ebim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "reference.nnw".into());
    let start = Instant::now();
    let trained = reference::train_reference()?;
    println!("{}", trained.model);
    for (i, loss) in trained.epoch_losses.iter().enumerate() {
        println!("epoch {:>2}  loss {loss:.4}", i + 1);
    }
    println!(
        "train accuracy {:.3}, test accuracy {:.3}, {:.1}s",
        trained.train_accuracy,
        trained.test_accuracy.unwrap_or(f64::NAN),
        start.elapsed().as_secs_f64()
    );
    save_weights(&trained.model, &out)?;
    println!("saved {out}");
    Ok(())
}
