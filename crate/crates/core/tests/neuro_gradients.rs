mod support;

use neurox_core::neuro::{loss_and_gradients, FusionModel, Label, Modalities, ModelConfig, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::fixtures::{random_sample, reduced_config};
use support::network_oracle::{finite_difference_gradients, relative_error};

const FD_STEP: f64 = 1e-4;
const TOLERANCE: f64 = 1e-4;

/// Initialised model with every tensor (layer-norm gains and biases
/// included) jittered so no gradient is structurally zero.
fn jittered_model(cfg: &ModelConfig, seed: u64) -> FusionModel<f64> {
    let mut model = FusionModel::init(cfg, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    for mut t in model.tensors_mut() {
        t.mapv_inplace(|v| v + rng.gen_range(-0.1..0.1));
    }
    model
}

fn batch(cfg: &ModelConfig, seed: u64) -> Vec<Sample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        random_sample(&mut rng, cfg, 0, Label::Ad, 4),
        random_sample(&mut rng, cfg, 1, Label::Cn, 2),
        random_sample(&mut rng, cfg, 2, Label::Ad, 3),
    ]
}

fn check(cfg: &ModelConfig) -> f64 {
    let model = jittered_model(cfg, 11);
    let samples = batch(cfg, 12);
    let refs: Vec<&Sample<f64>> = samples.iter().collect();
    let (_, grad) = loss_and_gradients(&refs, &model).unwrap();
    let numeric = finite_difference_gradients(&model, &refs, FD_STEP);
    let mut worst: f64 = 0.0;
    for ((name, analytic), (fd_name, fd)) in grad.named_tensors().iter().zip(&numeric) {
        assert_eq!(name, fd_name);
        let a: Vec<f64> = analytic.iter().copied().collect();
        let err = relative_error(&a, fd, 1e-10);
        assert!(err < TOLERANCE, "{name}: relative error {err:.3e}");
        worst = worst.max(err);
    }
    worst
}

#[test]
fn all_modalities_match_finite_differences() {
    let cfg = reduced_config();
    assert_eq!(cfg.token_count(), 6);
    let worst = check(&cfg);
    println!("worst relative error {worst:.3e}");
}

#[test]
fn key_padding_mask_matches_finite_differences() {
    check(&ModelConfig {
        key_padding_mask: true,
        ..reduced_config()
    });
}

#[test]
fn ablated_layouts_match_finite_differences() {
    for m in &Modalities::ABLATION_GRID[1..] {
        check(&reduced_config().with_modalities(*m));
    }
}

#[test]
fn duplicated_sample_has_same_mean_loss() {
    let cfg = reduced_config();
    let model = jittered_model(&cfg, 3);
    let s = batch(&cfg, 4).remove(0);
    let (single, g1) = loss_and_gradients(&[&s], &model).unwrap();
    let (double, g2) = loss_and_gradients(&[&s, &s], &model).unwrap();
    assert!((single - double).abs() < 1e-15);
    for ((_, a), (_, b)) in g1.named_tensors().iter().zip(g2.named_tensors().iter()) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()));
        }
    }
}
