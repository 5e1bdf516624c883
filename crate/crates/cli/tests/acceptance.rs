//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::collections::HashSet;
use std::fs;
use std::time::Instant;

use ebim::attack::{self, AttackConfig, AttackResult, EntropyParams};
use ebim::dataset::Sample;
use ebim::image::linf_distance;
use ebim::maps::{self, local_entropy};
use ebim::stats::{
    one_sample_t_one_tailed, paired_t_one_tailed, read_jsonl, run_hypothesis_battery,
    shapiro_wilk, simulate_study, summarize, t_power, wilcoxon_signed_rank_using, Alternative,
    Battery, Comparison, Condition, Method, SyntheticStudy, TestFamily, HYPOTHESES,
};
use ebim::{reference, Error, GrayMap, Image, Model, StrengthMap};
use ebim_study::{results_from_records, serve, ImageTriple, ResultsReport, Study, StudyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::{reference_model, target_for};

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce(&mut LinfAudit) -> Outcome>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// Every attack run by the suite passes through here, so the ℓ∞ criterion
/// covers all of them.
#[derive(Default)]
struct LinfAudit {
    checked: usize,
    violations: Vec<String>,
}

impl LinfAudit {
    /// Allowance for the rounding of repeated floating-point steps.
    const SLACK: f64 = 1e-12;

    fn check(&mut self, label: &str, x: &Image, r: &AttackResult, bound: f64) {
        self.checked += 1;
        let linf = linf_distance(x, &r.adversarial).unwrap();
        if linf > bound + Self::SLACK {
            self.violations.push(format!("{label}: linf {linf} > {bound}"));
        }
        if r.adversarial.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            self.violations.push(format!("{label}: pixel outside [0, 1]"));
        }
    }

    fn iterative(&mut self, label: &str, x: &Image, r: &AttackResult, cfg: &AttackConfig) {
        let bound = cfg.linf_budget.min(r.iterations_used as f64 * cfg.stepsize);
        self.check(label, x, r, bound);
    }
}

fn test_samples() -> Vec<Sample> {
    reference::test_set().samples().to_vec()
}

fn targeted(m: &Model, i: usize, x: &Image) -> AttackConfig {
    let predicted = m.forward(x).unwrap().label;
    AttackConfig::targeted(target_for(i, predicted, m.classes()))
}

// 1 ---------------------------------------------------------------------------

/// `logsumexp(z) − z_label`, without the probability floor of `Model::loss`.
fn unclamped_ce(m: &Model, x: &Image, label: usize) -> f64 {
    let z = m.forward(x).unwrap().logits;
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln() - z[label]
}

fn gradient_fidelity() -> Outcome {
    let start = Instant::now();
    let m = &reference_model().model;
    let shape = m.input_shape();
    let h = 1e-5;
    let coords_per_input = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut checked, mut skipped) = (0.0f64, 0usize, 0usize);
    for _ in 0..100 {
        let data: Vec<f64> = (0..shape.len()).map(|_| rng.random_range(0.01..0.99)).collect();
        let x = Image::new(shape.width, shape.height, shape.channels, data.clone()).unwrap();
        let label = rng.random_range(0..m.classes());
        let g = m.input_gradient(&x, label).unwrap().data;
        let pattern = m.activation_pattern(&x).unwrap();
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for _ in 0..coords_per_input {
            let i = rng.random_range(0..shape.len());
            let shifted = |delta: f64| {
                let mut d = data.clone();
                d[i] += delta;
                Image::new(shape.width, shape.height, shape.channels, d).unwrap()
            };
            let (plus, minus) = (shifted(h), shifted(-h));
            if m.activation_pattern(&plus).unwrap() != pattern
                || m.activation_pattern(&minus).unwrap() != pattern
            {
                skipped += 1;
                continue;
            }
            let fd = (unclamped_ce(m, &plus, label) - unclamped_ce(m, &minus, label)) / (2.0 * h);
            err = err.max((fd - g[i]).abs());
            scale = scale.max(g[i].abs());
            checked += 1;
        }
        if scale > 0.0 {
            worst = worst.max(err / scale);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "max relative error {worst:.2e} over 100 inputs ({checked} coordinates, {skipped} at kinks skipped), {secs:.1} s"
    );
    ensure(worst <= 1e-4 && secs < 60.0 && checked >= 100 * coords_per_input * 3 / 4, || detail.clone())?;
    Ok(detail)
}

// 2 ---------------------------------------------------------------------------

fn confined(x: &Image, r: &AttackResult, map: &StrengthMap) -> bool {
    let ch = x.channels();
    map.data().iter().enumerate().all(|(p, &e)| {
        e != 0.0
            || (0..ch).all(|c| x.data()[p * ch + c].to_bits() == r.adversarial.data()[p * ch + c].to_bits())
    })
}

fn mask_confinement(audit: &mut LinfAudit) -> Outcome {
    let m = &reference_model().model;
    let samples = test_samples();
    let params = EntropyParams::default();
    let (mut ebim_runs, mut localized_runs, mut frozen) = (0, 0, 0usize);
    let mut failures = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if ebim_runs == 25 {
            break;
        }
        let cfg = targeted(m, i, &s.image);
        match attack::ebim(m, &s.image, &cfg, &params) {
            Ok(r) => {
                ebim_runs += 1;
                audit.iterative("mask/ebim", &s.image, &r, &cfg);
                frozen += r.strength_map.data().iter().filter(|&&e| e == 0.0).count();
                if !r.strength_map.is_binary() || !confined(&s.image, &r, &r.strength_map) {
                    failures.push(format!("ebim #{i}"));
                }
            }
            Err(Error::EmptyEntropyMask { .. }) => {}
            Err(e) => return Err(format!("ebim #{i}: {e}")),
        }
    }
    for seed in 0..25u64 {
        let s = &samples[100 + seed as usize];
        let noise = maps::perlin_map(28, 28, 8, 3, seed).unwrap();
        let map = maps::binarize_to_kappa(&noise, 0.3, maps::DEFAULT_KAPPA_TOLERANCE).unwrap();
        let cfg = targeted(m, 100 + seed as usize, &s.image);
        let r = attack::localized_bim(m, &s.image, &cfg, &map).unwrap();
        localized_runs += 1;
        audit.iterative("mask/localized", &s.image, &r, &cfg);
        frozen += map.data().iter().filter(|&&e| e == 0.0).count();
        if !confined(&s.image, &r, &map) {
            failures.push(format!("localized seed {seed}"));
        }
    }
    let detail = format!(
        "{ebim_runs} EbIM + {localized_runs} localized attacks, {frozen} masked pixels bit-identical"
    );
    ensure(failures.is_empty() && ebim_runs + localized_runs == 50, || {
        format!("{detail}; violations: {failures:?}")
    })?;
    Ok(detail)
}

// 3 ---------------------------------------------------------------------------

fn targeted_success(audit: &mut LinfAudit) -> Outcome {
    let r = reference_model();
    let m = &r.model;
    let start = Instant::now();
    let samples = test_samples();
    let params = EntropyParams::default();
    let (mut bim_ok, mut ebim_ok, mut eligible) = (0, 0, 0);
    for (i, s) in samples.iter().take(100).enumerate() {
        let cfg = targeted(m, i, &s.image);
        let b = attack::bim(m, &s.image, &cfg).unwrap();
        audit.iterative("success/bim", &s.image, &b, &cfg);
        bim_ok += usize::from(b.success);
        let map = params.strength_map(&s.image).unwrap();
        if map.kappa() >= 0.05 {
            eligible += 1;
            let e = attack::ebim(m, &s.image, &cfg, &params).unwrap();
            audit.iterative("success/ebim", &s.image, &e, &cfg);
            ebim_ok += usize::from(e.success);
        }
    }
    let attack_secs = start.elapsed().as_secs_f64();
    let total = r.record.seconds + attack_secs;
    let ebim_rate = ebim_ok as f64 / eligible.max(1) as f64;
    let detail = format!(
        "test accuracy {:.3}; BIM {bim_ok}/100; EbIM {ebim_ok}/{eligible} eligible ({:.0}%); {:.0} s training{} + {attack_secs:.0} s attacks",
        r.record.test_accuracy,
        100.0 * ebim_rate,
        r.record.seconds,
        if r.trained_here { "" } else { " (cached)" },
    );
    ensure(
        r.record.test_accuracy >= 0.9 && bim_ok >= 90 && eligible > 0 && ebim_rate >= 0.75 && total < 600.0,
        || detail.clone(),
    )?;
    Ok(detail)
}

// 4 ---------------------------------------------------------------------------

fn equivalence(audit: &mut LinfAudit) -> Outcome {
    let m = &reference_model().model;
    let samples = test_samples();
    let ones = StrengthMap::filled(28, 28, 1.0).unwrap();
    let mut mismatched = Vec::new();
    for (i, s) in samples.iter().skip(200).take(20).enumerate() {
        let cfg = targeted(m, 200 + i, &s.image);
        let a = attack::bim(m, &s.image, &cfg).unwrap();
        let b = attack::localized_bim(m, &s.image, &cfg, &ones).unwrap();
        audit.iterative("equivalence/bim", &s.image, &a, &cfg);
        audit.iterative("equivalence/localized", &s.image, &b, &cfg);
        let same = a.iterations_used == b.iterations_used
            && a.adversarial.data().iter().zip(b.adversarial.data()).all(|(p, q)| p.to_bits() == q.to_bits());
        if !same {
            mismatched.push(200 + i);
        }
    }
    ensure(mismatched.is_empty(), || format!("differs on fixtures {mismatched:?}"))?;
    Ok("all-ones localized BIM bitwise equal to BIM on 20 fixtures".into())
}

// 5 ---------------------------------------------------------------------------

fn kappa_mechanics(audit: &mut LinfAudit) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_scale = 0.0f64;
    for _ in 0..200 {
        let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
        let data: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
        let e = StrengthMap::new(w, h, data).unwrap();
        let c = rng.random::<f64>();
        let scaled = maps::scale_brightness(&e, c).unwrap();
        worst_scale = worst_scale.max((scaled.kappa() - c * e.kappa()).abs());
    }
    ensure(worst_scale <= 1e-12, || format!("kappa(scale(E, c)) off by {worst_scale:e}"))?;

    let m = &reference_model().model;
    let samples = test_samples();
    let levels = [0.43, 0.14, 0.04];
    let mut iterations = vec![Vec::new(); levels.len()];
    let mut worst_target = 0.0f64;
    for seed in 0..10u64 {
        let idx = 150 + seed as usize;
        let x = &samples[idx].image;
        let cfg = targeted(m, idx, x);
        let noise = maps::perlin_map(28, 28, 8, 3, seed).unwrap();
        for (k, &target) in levels.iter().enumerate() {
            let map = maps::adjust_to_kappa(&noise, target, maps::DEFAULT_KAPPA_TOLERANCE)
                .map_err(|e| format!("seed {seed}, kappa {target}: {e}"))?;
            worst_target = worst_target.max((map.kappa() - target).abs());
            let r = attack::localized_bim(m, x, &cfg, &map).unwrap();
            audit.iterative("kappa/localized", x, &r, &cfg);
            iterations[k].push(r.iterations_used);
        }
    }
    let medians: Vec<f64> = iterations.into_iter().map(median).collect();
    let detail = format!(
        "scale law within {worst_scale:.1e}; targets hit within {worst_target:.4}; median iterations at kappa 0.43/0.14/0.04: {}/{}/{}",
        medians[0], medians[1], medians[2]
    );
    ensure(
        worst_target <= 0.005 && medians[0] <= medians[1] && medians[1] <= medians[2],
        || detail.clone(),
    )?;
    Ok(detail)
}

// 6 ---------------------------------------------------------------------------

fn naive_entropy(g: &GrayMap, radius: usize, bins: usize) -> Vec<f64> {
    let (w, h) = (g.width() as isize, g.height() as isize);
    let r = radius as isize;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut counts = vec![0usize; bins];
            let mut n = 0usize;
            for yy in (y - r).max(0)..=(y + r).min(h - 1) {
                for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                    let v = g.get(xx as usize, yy as usize);
                    let b = ((v * bins as f64).floor() as usize).min(bins - 1);
                    counts[b] += 1;
                    n += 1;
                }
            }
            let s: f64 = counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n as f64;
                    -p * p.log2()
                })
                .sum();
            out.push(s);
        }
    }
    out
}

fn entropy_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let (w, h) = (rng.random_range(5..40), rng.random_range(5..40));
        let data: Vec<f64> = (0..w * h)
            .map(|_| if k % 2 == 0 { rng.random::<f64>() } else { f64::from(rng.random_range(0u8..12)) / 255.0 })
            .collect();
        let g = GrayMap::new(w, h, data).unwrap();
        let (radius, bins) = [(5, 256), (1, 2), (2, 16), (3, 8), (7, 64)][k % 5];
        let fast = local_entropy(&g, radius, bins).unwrap();
        for (a, b) in fast.data().iter().zip(naive_entropy(&g, radius, bins)) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("naive oracle differs by {worst:e}"))?;

    let constant = local_entropy(&GrayMap::new(31, 17, vec![0.42; 31 * 17]).unwrap(), 5, 256).unwrap();
    ensure(constant.data().iter().all(|&v| v == 0.0), || "constant image has entropy".into())?;

    // radius 3 windows cover the whole 4×4 image at every pixel
    let halves: Vec<f64> = (0..16).map(|i| if i % 4 < 2 { 0.2 } else { 0.8 }).collect();
    let quarters: Vec<f64> = (0..16).map(|i| [0.0, 0.3, 0.6, 0.9][i % 4]).collect();
    let one_bit = local_entropy(&GrayMap::new(4, 4, halves).unwrap(), 3, 256).unwrap();
    let two_bit = local_entropy(&GrayMap::new(4, 4, quarters).unwrap(), 3, 256).unwrap();
    ensure(
        one_bit.data().iter().all(|v| (v - 1.0).abs() <= 1e-12)
            && two_bit.data().iter().all(|v| (v - 2.0).abs() <= 1e-12),
        || "analytic 1-bit / 2-bit windows off".into(),
    )?;
    Ok(format!(
        "naive oracle within {worst:.1e} on 10 images; constant image all zero; 1-bit and 2-bit windows exact"
    ))
}

// 7 ---------------------------------------------------------------------------

fn linf_discipline(audit: &mut LinfAudit) -> Outcome {
    let m = &reference_model().model;
    let samples = test_samples();
    for (i, s) in samples.iter().skip(250).take(10).enumerate() {
        let eps = 0.02 * (i + 1) as f64;
        let r = attack::fgsm(m, &s.image, eps).unwrap();
        audit.check("linf/fgsm", &s.image, &r, eps);
        let mut cfg = targeted(m, 250 + i, &s.image);
        cfg.linf_budget = 0.01 + 0.005 * i as f64;
        cfg.max_iterations = 40;
        let r = attack::bim(m, &s.image, &cfg).unwrap();
        audit.iterative("linf/budget", &s.image, &r, &cfg);
    }
    let detail = format!("{} attack outputs checked, {} violations", audit.checked, audit.violations.len());
    ensure(audit.violations.is_empty(), || format!("{detail}: {:?}", audit.violations))?;
    Ok(detail)
}

// 8 ---------------------------------------------------------------------------

/// Exact tail probabilities of W⁺ by enumerating all sign assignments.
fn brute_force_wilcoxon(d: &[f64]) -> Option<(f64, f64)> {
    let kept: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    if kept.is_empty() {
        return None;
    }
    let abs: Vec<f64> = kept.iter().map(|v| v.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|a| {
            let below = abs.iter().filter(|b| *b < a).count() as f64;
            let equal = abs.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = kept.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = kept.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        le += u64::from(w <= observed + 1e-9);
        ge += u64::from(w >= observed - 1e-9);
    }
    let all = (1u64 << n) as f64;
    Some((le as f64 / all, ge as f64 / all))
}

/// Upper tail of Student's t with two degrees of freedom, in closed form.
fn t2_sf(t: f64) -> f64 {
    0.5 * (1.0 - t / (t * t + 2.0).sqrt())
}

fn statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    let mut compared = 0;
    let mut k = 0;
    while compared < 100 {
        k += 1;
        let n = 1 + k % 12;
        let d: Vec<f64> = (0..n)
            .map(|_| {
                if k % 3 == 0 {
                    f64::from(rng.random_range(-3i32..=3))
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect();
        match brute_force_wilcoxon(&d) {
            Some((le, ge)) => {
                let less = wilcoxon_signed_rank_using(&d, Alternative::Less, true).map_err(|e| e.to_string())?;
                let greater = wilcoxon_signed_rank_using(&d, Alternative::Greater, true).map_err(|e| e.to_string())?;
                worst = worst.max((less.p_value - le).abs()).max((greater.p_value - ge).abs());
                compared += 1;
            }
            None => ensure(
                wilcoxon_signed_rank_using(&d, Alternative::Less, true).is_err(),
                || "all-zero differences not flagged".into(),
            )?,
        }
    }
    ensure(worst <= 1e-12, || format!("exact Wilcoxon off by {worst:e}"))?;

    let t = paired_t_one_tailed(&[2.0, 1.0, 3.0], &[0.0; 3], Alternative::Greater).map_err(|e| e.to_string())?;
    let oracle = t2_sf(t.statistic);
    ensure((t.p_value - oracle).abs() <= 1e-9 && (t.p_value - 0.0371).abs() <= 1e-3, || {
        format!("paired t p = {} (closed form {oracle})", t.p_value)
    })?;

    const WEIGHTS: [f64; 11] = [148., 154., 158., 160., 161., 162., 166., 170., 182., 195., 236.];
    const TABLE_A11: [f64; 5] = [0.5601, 0.3315, 0.2260, 0.1429, 0.0695];
    let mean = WEIGHTS.iter().sum::<f64>() / 11.0;
    let ss: f64 = WEIGHTS.iter().map(|v| (v - mean).powi(2)).sum();
    let b: f64 = (0..5).map(|i| TABLE_A11[i] * (WEIGHTS[10 - i] - WEIGHTS[i])).sum();
    let w_table = b * b / ss;
    let sw = shapiro_wilk(&WEIGHTS).map_err(|e| e.to_string())?;
    ensure((sw.statistic - w_table).abs() <= 1e-3 && sw.p_value < 0.01, || {
        format!("Shapiro-Wilk W = {} vs tabulated {w_table}", sw.statistic)
    })?;

    let power = t_power(2.29, 35, 0.05).map_err(|e| e.to_string())?;
    ensure(power > 0.9999, || format!("power {power}"))?;

    let extreme = battery_for(&SyntheticStudy::extreme(35, 7))?;
    let h1 = [TestFamily::TTest, TestFamily::Wilcoxon]
        .iter()
        .filter_map(|&f| extreme.cell(f, 1).outcome.p_value())
        .fold(f64::INFINITY, f64::min);
    let near = battery_for(&SyntheticStudy {
        identical_rate: [0.98, 0.02, 0.98],
        spread: 0.02,
        ..SyntheticStudy::extreme(35, 7)
    })?;
    let near_t = near.cell(TestFamily::TTest, 1).outcome.p_value().unwrap_or(1.0);
    ensure(h1 < 1e-6 && near_t < 1e-6, || {
        format!("extreme study hypothesis-1 p = {h1:e}, near-extreme t p = {near_t:e}")
    })?;

    Ok(format!(
        "exact Wilcoxon = brute force on {compared} vectors; t(2,1,3) p = {:.4}; SW W = {:.4}; power {power:.6}; extreme H1 p = {h1:.1e}",
        t.p_value, sw.statistic
    ))
}

fn battery_for(study: &SyntheticStudy) -> Result<Battery, String> {
    let records = simulate_study(study).map_err(|e| e.to_string())?;
    let summaries = summarize(&records).map_err(|e| e.to_string())?;
    run_hypothesis_battery(&summaries, 0.05).map_err(|e| e.to_string())
}

// 9 ---------------------------------------------------------------------------

fn battery_shape() -> Outcome {
    let battery = battery_for(&SyntheticStudy::published_ordering(35, 9))?;
    ensure(battery.cells.len() == 10 && battery.rows().len() == 10, || {
        format!("{} cells", battery.cells.len())
    })?;
    for (k, cell) in battery.cells.iter().enumerate() {
        let family = if k < 5 { TestFamily::TTest } else { TestFamily::Wilcoxon };
        let h = &HYPOTHESES[k % 5];
        ensure(cell.family == family && cell.hypothesis == h.id, || format!("cell {k} out of place"))?;
        let report = cell.outcome.report().ok_or_else(|| format!("cell {k} degenerate"))?;
        let paired = matches!(h.comparison, Comparison::Paired { .. });
        ensure(paired == matches!(h.id, 1 | 4 | 5), || format!("hypothesis {} pairing", h.id))?;
        let method_ok = match (family, paired) {
            (TestFamily::TTest, true) => report.method == Method::PairedT,
            (TestFamily::TTest, false) => report.method == Method::OneSampleT,
            (TestFamily::Wilcoxon, _) => {
                matches!(report.method, Method::WilcoxonExact | Method::WilcoxonNormal)
            }
        };
        ensure(method_ok && report.tail == Some(h.tail), || format!("cell {k} method/tail"))?;
    }

    // the one-sample cells really test against 0.5, the paired cells against the partner condition
    let records = simulate_study(&SyntheticStudy::published_ordering(35, 9)).unwrap();
    let summaries = summarize(&records).unwrap();
    let col = |c: Condition| summaries.iter().map(|s| s.mean(c).unwrap()).collect::<Vec<_>>();
    let h2 = one_sample_t_one_tailed(&col(Condition::Bim), 0.5, Alternative::Less).unwrap();
    let h4 = paired_t_one_tailed(&col(Condition::Bim), &col(Condition::None), Alternative::Less).unwrap();
    ensure(
        battery.cell(TestFamily::TTest, 2).outcome.report() == Some(&h2)
            && battery.cell(TestFamily::TTest, 4).outcome.report() == Some(&h4),
        || "cells do not match direct tests".into(),
    )?;
    Ok("2 methods x 5 hypotheses; (1),(4),(5) paired, (2),(3) one-sample".into())
}

// 10 --------------------------------------------------------------------------

fn service_protocol() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pgm = |seed: u8| {
        let mut bytes = b"P5\n4 4\n255\n".to_vec();
        bytes.extend((0..16u8).map(|k| k.wrapping_mul(13).wrapping_add(seed)));
        bytes
    };
    let triples: Vec<ImageTriple> = (0..80u8)
        .map(|i| {
            let write = |kind: &str, content: Vec<u8>| {
                let p = dir.path().join(format!("SCENE{i}_{kind}.pgm"));
                fs::write(&p, content).unwrap();
                p
            };
            ImageTriple {
                id: format!("SCENE{i}"),
                original: write("ORIG", pgm(i)),
                bim: write("BIMX", pgm(i.wrapping_add(100))),
                ebim: write("EBIMX", pgm(i.wrapping_add(200))),
            }
        })
        .collect();
    let config = StudyConfig::new(triples);
    let log = dir.path().join("responses.jsonl");
    let study = Study::open(config.clone(), &log).map_err(|e| e.to_string())?;

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let (live, blinding, consistent) = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        tokio::spawn(serve(listener, study));
        let http = reqwest::Client::new();
        let mut blinding = Vec::new();
        let mut tokens = HashSet::new();
        let mut consistent = true;
        for _ in 0..2 {
            let s: Value = http.post(format!("{base}/api/session")).send().await.unwrap().json().await.unwrap();
            let sid = s["session_id"].as_str().unwrap().to_string();
            let count = s["trial_count"].as_u64().unwrap();
            if count != 240 {
                blinding.push(format!("trial_count {count}"));
            }
            for i in 0..count {
                let text = http.get(format!("{base}/api/trial/{sid}/{i}")).send().await.unwrap().text().await.unwrap();
                let lower = text.to_ascii_lowercase();
                for leak in ["scene", "orig", "bim", "none", "cond", "pair", "side", "\"i", "\"ii"] {
                    if lower.contains(leak) {
                        blinding.push(format!("{leak:?} in {text}"));
                    }
                }
                let payload: Value = serde_json::from_str(&text).unwrap();
                if payload.as_object().map(|o| o.len()) != Some(3) {
                    blinding.push(format!("unexpected fields in {text}"));
                }
                let mut images = Vec::new();
                for key in ["left_url", "right_url"] {
                    let url = payload[key].as_str().unwrap_or_default();
                    let token = url.strip_prefix("/img/").unwrap_or_default();
                    if token.len() != 32 || !token.bytes().all(|b| b.is_ascii_hexdigit()) || !tokens.insert(token.to_string()) {
                        blinding.push(format!("non-opaque or reused url {url}"));
                    }
                    images.push(http.get(format!("{base}{url}")).send().await.unwrap().bytes().await.unwrap());
                }
                let choice = if images[0] == images[1] { "identical" } else { "different" };
                let ack: Value = http
                    .post(format!("{base}/api/response/{sid}/{i}"))
                    .json(&serde_json::json!({ "choice": choice, "latency_ms": 900 + i }))
                    .send()
                    .await
                    .unwrap()
                    .json()
                    .await
                    .unwrap();
                consistent &= ack["answered"] == i + 1;
            }
        }
        let live = http.get(format!("{base}/api/results")).send().await.unwrap().text().await.unwrap();
        (live, blinding, consistent)
    });
    ensure(blinding.is_empty(), || format!("blinding: {:?}", &blinding[..blinding.len().min(3)]))?;
    ensure(consistent, || "acknowledgements out of step".into())?;

    let records = read_jsonl(fs::read(&log).unwrap().as_slice()).map_err(|e| e.to_string())?;
    // the scripted client answered from the image bytes, so the log must show
    // identical pairs exactly for the unmodified condition
    let served_correctly = records.iter().all(|r| {
        (r.condition == Condition::None) == (r.choice == ebim::stats::Choice::Identical)
    });
    let replayed = results_from_records(&records, config.trial_count()).map_err(|e| e.to_string())?;
    let reopened = Study::open(config.clone(), &log).and_then(|s| s.results()).map_err(|e| e.to_string())?;
    let report: ResultsReport = serde_json::from_str(&live).map_err(|e| e.to_string())?;
    ensure(served_correctly, || "served pairs do not match the logged conditions".into())?;
    ensure(
        serde_json::to_string(&replayed).unwrap() == live
            && serde_json::to_string(&reopened).unwrap() == live
            && report.responses == 480
            && report.battery.is_some(),
        || "replayed results differ from the live results".into(),
    )?;
    Ok(format!(
        "2 scripted sessions x 240 trials; {} opaque image urls; replay of {} log lines bit-exact",
        2 * 480,
        records.len()
    ))
}

fn main() {
    let reference = reference_model();
    println!(
        "reference model: {} in {:.0} s",
        if reference.trained_here { "trained" } else { "loaded from cache, trained" },
        reference.record.seconds
    );
    let mut audit = LinfAudit::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("gradient fidelity", Box::new(|_| gradient_fidelity())),
        ("mask confinement", Box::new(mask_confinement)),
        ("targeted attack success", Box::new(targeted_success)),
        ("all-ones equivalence", Box::new(equivalence)),
        ("kappa mechanics", Box::new(kappa_mechanics)),
        ("entropy correctness", Box::new(|_| entropy_correctness())),
        ("linf discipline", Box::new(linf_discipline)),
        ("statistics", Box::new(|_| statistics())),
        ("battery shape", Box::new(|_| battery_shape())),
        ("service protocol", Box::new(|_| service_protocol())),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check(&mut audit);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
