//! Prior infusion on a seeded desk-scale encoder-decoder.
//!
//! Images are cut into patches and linearly projected to the visual
//! embedding `V`; the prior `P` is added to `V`, positions are encoded, one
//! encoder block produces `L`, and `P` is added again before the decoder
//! reads it. Both additions live in one place (`encode`) and can be switched
//! off with [`InfusionSites`] without touching any weight.

mod grad;
mod model;
mod real;
mod tensor;

pub use grad::{
    grad_check, grad_check_scaled, relative_error, sampled_weights, GradCheck, GradReport,
    GradTarget, FD_STEP, REL_ERROR_FLOOR, SAMPLED_WEIGHTS,
};
pub use model::{
    forward, forward_baseline, forward_with, infuse, visual_extract, Attention, FeedForward,
    ForwardOutput, ImagePair, Infusable, InfusionSites, LatentRepresentation, Params,
    PriorScalar, ToyConfig, ToyModel, VisualEmbedding, BOS, DEFAULT_SEED, EOS,
};
pub use real::{Dual, Real};
pub use tensor::Matrix;
