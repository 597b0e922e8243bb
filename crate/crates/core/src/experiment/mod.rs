//! Minibatch SGD, generalization-gap measurement, and the equivalence checks.

mod gap;
mod train;
pub mod verify;

pub use gap::{
    gap_estimate, gap_estimate_from, gap_exact, gap_exact_from, mean_loss, GapEstimator, GapReport,
    Memorizer, Predictor,
};
pub use train::{
    init_network, minibatch_gradient, minibatch_gradient_and_loss, sgd_step, train, ActiveMask,
    AugmentMode, Augmentation, MaskGranularity, Sampling, TrainConfig, TrainOutcome,
    DIVERGENCE_THRESHOLD,
};
pub use verify::{
    claims, relative_max_diff, verify_noise_penalty, verify_noise_penalty_pass_rate, verify_dropconnect_reduction,
    random_linear_layer, verify_dropout_as_noise,
    verify_feature_noise_regularizes, verify_gradients, verify_l2_vs_noise_training,
    verify_mask_count, verify_memorizer_gap, verify_scheme_calibration, EquivalenceReport,
    FeatureNoiseOutcome, L2NoiseOutcome, WEIGHT_TOLERANCE,
};
