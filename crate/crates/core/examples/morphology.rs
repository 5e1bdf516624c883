//! Dilation and erosion of a binary entropy mask, and their effect on its
//! relative total strength.
//!
//! ```text
//! cargo run --release -p ebim --example morphology
//! ```

use ebim::attack::EntropyParams;
use ebim::maps::{dilate, erode, strength_to_pgm};
use ebim::pnm::save_image;
use ebim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = reference::test_set().samples()[0].image.clone();
    let mask = EntropyParams::default().strength_map(&x)?;
    println!("mask        kappa {:.3}", mask.kappa());
    for r in 1..=2 {
        let grown = dilate(&mask, r)?;
        let shrunk = erode(&mask, r)?;
        println!("radius {r}: dilated {:.3}, eroded {:.3}", grown.kappa(), shrunk.kappa());
        save_image(&strength_to_pgm(&grown), format!("dilated_{r}.pgm"))?;
        save_image(&strength_to_pgm(&shrunk), format!("eroded_{r}.pgm"))?;
    }
    Ok(())
}
