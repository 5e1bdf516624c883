//! Localized BIM under Perlin-noise strength maps brought to decreasing
//! relative total strength. Weaker maps need more iterations.
//!
//! ```text
//! cargo run --release -p ebim --example localized_perlin -- [reference.nnw] [image index]
//! ```

use ebim::attack::{localized_bim, AttackConfig};
use ebim::maps::{adjust_to_kappa, perlin_map, strength_to_pgm, DEFAULT_KAPPA_TOLERANCE};
use ebim::pnm::save_image;
use ebim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let weights = args.next().unwrap_or_else(|| "reference.nnw".into());
    let index: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let model = reference::load_or_train(&weights)?;
    let x = reference::test_set().samples()[index].image.clone();
    let predicted = model.forward(&x)?.label;
    let cfg = AttackConfig::targeted(reference::attack_target(index, predicted, model.classes()));

    let noise = perlin_map(x.width(), x.height(), 8, 3, 42)?;
    for kappa in [0.43, 0.14, 0.04] {
        let map = adjust_to_kappa(&noise, kappa, DEFAULT_KAPPA_TOLERANCE)?;
        let r = localized_bim(&model, &x, &cfg, &map)?;
        println!(
            "kappa {:.3}: {} after {:>4} iterations, linf {:.3}",
            map.kappa(),
            if r.success { "success" } else { "no success" },
            r.iterations_used,
            r.norms.linf
        );
        save_image(&strength_to_pgm(&map), format!("perlin_{kappa}.pgm"))?;
        save_image(&r.adversarial, format!("localized_{kappa}.pgm"))?;
    }
    Ok(())
}
