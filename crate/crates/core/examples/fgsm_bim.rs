//! Untargeted FGSM at several step sizes, then a targeted BIM run, on one
//! held-out image of the reference model.
//!
//! ```text
//! cargo run --release -p ebim --example fgsm_bim -- [reference.nnw] [image index]
//! ```

use ebim::attack::{bim, fgsm, AttackConfig};
use ebim::pnm::save_image;
use ebim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let weights = args.next().unwrap_or_else(|| "reference.nnw".into());
    let index: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let model = reference::load_or_train(&weights)?;
    let x = reference::test_set().samples()[index].image.clone();
    let before = model.forward(&x)?;
    println!("original: label {} with certainty {:.4}", before.label, before.certainty);

    for eps in [0.01, 0.03, 0.1, 0.3] {
        let r = fgsm(&model, &x, eps)?;
        println!(
            "FGSM eps {eps:<4}: label {} ({:.4}), linf {:.3}, l2 {:.3}",
            r.final_prediction.label, r.final_prediction.certainty, r.norms.linf, r.norms.l2
        );
    }

    let target = reference::attack_target(index, before.label, model.classes());
    let r = bim(&model, &x, &AttackConfig::targeted(target))?;
    println!(
        "BIM -> {target}: {} after {} iterations, certainty {:.4}, linf {:.3}, l0 {}",
        if r.success { "reached" } else { "missed" },
        r.iterations_used,
        r.final_prediction.probability(target),
        r.norms.linf,
        r.norms.l0
    );
    save_image(&x, "original.pgm")?;
    save_image(&r.adversarial, "bim.pgm")?;
    Ok(())
}
