//! Local entropy of an image and the two entropy-to-strength mappings.
//!
//! ```text
//! cargo run --release -p ebim --example entropy_map -- [image.pgm|ppm]
//! ```
//!
//! Without an argument a procedural shapes image is used.

use ebim::maps::{entropy_to_pgm, local_entropy, phi, strength_to_pgm, Phi, DEFAULT_BINS, DEFAULT_RADIUS};
use ebim::pnm::{load_image, save_image};
use ebim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = match std::env::args().nth(1) {
        Some(path) => load_image(path)?,
        None => reference::test_set().samples()[0].image.clone(),
    };
    let s = local_entropy(&x.to_grayscale(), DEFAULT_RADIUS, DEFAULT_BINS)?;
    println!(
        "{}x{}: local entropy max {:.3} of attainable {:.3} bits",
        s.width(),
        s.height(),
        s.max(),
        s.attainable_max()
    );
    save_image(&entropy_to_pgm(&s), "entropy.pgm")?;

    for threshold in [3.0, 4.2, 5.0] {
        let e = phi(&s, Phi::Binarize { threshold })?;
        println!("binarized at {threshold} bits: kappa {:.3}", e.kappa());
    }
    for gamma in [0.5, 1.0, 2.0] {
        let e = phi(&s, Phi::NormalizeGamma { gamma })?;
        println!("(S / S_max)^{gamma}: kappa {:.3}", e.kappa());
    }
    save_image(&strength_to_pgm(&phi(&s, Phi::default())?), "strength.pgm")?;
    Ok(())
}
