//! EbIM next to plain BIM: the entropy mask, its relative total strength, and
//! how much of the image each attack touches.
//!
//! ```text
//! cargo run --release -p ebim --example ebim_attack -- [reference.nnw] [image index]
//! ```
//!
//! Writes `ebim_mask.pgm`, `bim.pgm`, `ebim.pgm` and their contrast-maximized
//! differences to the original.

use ebim::attack::{bim, ebim, AttackConfig, EntropyParams};
use ebim::image::contrast_maximized_difference;
use ebim::maps::strength_to_pgm;
use ebim::pnm::save_image;
use ebim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let weights = args.next().unwrap_or_else(|| "reference.nnw".into());
    let index: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let model = reference::load_or_train(&weights)?;
    let x = reference::test_set().samples()[index].image.clone();
    let predicted = model.forward(&x)?.label;
    let cfg = AttackConfig::targeted(reference::attack_target(index, predicted, model.classes()));
    let params = EntropyParams::default();

    let plain = bim(&model, &x, &cfg)?;
    let local = ebim(&model, &x, &cfg, &params)?;
    println!("mask kappa {:.3}", local.strength_map.kappa());
    for (name, r) in [("BIM", &plain), ("EbIM", &local)] {
        println!(
            "{name:<5} success {:<5} iterations {:>4}  linf {:.3}  l2 {:.3}  changed pixels {}",
            r.success, r.iterations_used, r.norms.linf, r.norms.l2, r.norms.l0
        );
    }

    save_image(&strength_to_pgm(&local.strength_map), "ebim_mask.pgm")?;
    save_image(&plain.adversarial, "bim.pgm")?;
    save_image(&local.adversarial, "ebim.pgm")?;
    save_image(&contrast_maximized_difference(&x, &plain.adversarial)?, "bim_diff.pgm")?;
    save_image(&contrast_maximized_difference(&x, &local.adversarial)?, "ebim_diff.pgm")?;
    Ok(())
}
