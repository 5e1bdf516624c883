//! Targeted BIM and EbIM success rates of a trained model on held-out shapes.
//!
//! ```text
//! cargo run --release -p ebim --example attack_rates -- [reference.nnw] [images]
//! ```
//!
//! The weights file is created with the reference recipe if it is missing.

use std::time::Instant;

use ebim::attack::{bim, ebim, AttackConfig, EntropyParams};
use ebim::reference;
use ebim::Error;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let weights = args.next().unwrap_or_else(|| "reference.nnw".into());
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let model = reference::load_or_train(&weights)?;
    let test = reference::test_set();
    let classes = model.classes();

    let (mut bim_ok, mut ebim_ok, mut ebim_eligible) = (0, 0, 0);
    let (mut bim_iters, mut ebim_iters) = (Vec::new(), Vec::new());
    let start = Instant::now();
    for (i, sample) in test.samples().iter().take(count).enumerate() {
        let x = &sample.image;
        let predicted = model.forward(x)?.label;
        let cfg = AttackConfig::targeted(reference::attack_target(i, predicted, classes));

        let r = bim(&model, x, &cfg)?;
        bim_ok += usize::from(r.success);
        bim_iters.push(r.iterations_used);

        match ebim(&model, x, &cfg, &EntropyParams::default()) {
            Ok(r) if r.strength_map.kappa() >= 0.05 => {
                ebim_eligible += 1;
                ebim_ok += usize::from(r.success);
                ebim_iters.push(r.iterations_used);
            }
            Ok(_) | Err(Error::EmptyEntropyMask { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    bim_iters.sort_unstable();
    ebim_iters.sort_unstable();
    let median = |v: &[usize]| v.get(v.len() / 2).copied().unwrap_or(0);
    println!("BIM   {bim_ok}/{count} succeeded, median {} iterations", median(&bim_iters));
    println!(
        "EbIM  {ebim_ok}/{ebim_eligible} succeeded (maps with kappa >= 0.05), median {} iterations",
        median(&ebim_iters)
    );
    println!("{:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
