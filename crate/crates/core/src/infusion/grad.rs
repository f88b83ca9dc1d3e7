use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{forward, loss, patches_for, ImagePair, PriorScalar, ToyModel};
use super::real::Dual;
use super::tensor::Matrix;
use crate::error::Result;
use crate::numeric::serialize_sig17;

pub const FD_STEP: f64 = 1e-4;
pub const SAMPLED_WEIGHTS: usize = 4;
/// Floor on the relative-error denominator so exact zeros compare cleanly.
pub const REL_ERROR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradTarget {
    Prior,
    Weight(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheck {
    pub target: GradTarget,
    #[serde(serialize_with = "serialize_sig17")]
    pub analytic: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub numeric: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradReport {
    pub tokens: Vec<usize>,
    pub checks: Vec<GradCheck>,
    #[serde(serialize_with = "serialize_sig17")]
    pub max_rel_error: f64,
}

impl GradReport {
    pub fn prior(&self) -> &GradCheck {
        self.checks
            .iter()
            .find(|c| c.target == GradTarget::Prior)
            .expect("prior check is always present")
    }
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(REL_ERROR_FLOOR)
}

/// Analytic gradient of `scale * loss`, with the token sequence fixed to
/// the greedy decode at the given prior.
struct Objective<'a> {
    model: &'a ToyModel,
    patches: Matrix<f64>,
    prior: f64,
    tokens: Vec<usize>,
    scale: f64,
}

impl Objective<'_> {
    fn value(&self, prior: f64, weight: Option<(usize, f64)>) -> f64 {
        let params = match weight {
            Some((idx, delta)) => self
                .model
                .params
                .map_indexed(|i, &x| if i == idx { x + delta } else { x }),
            None => self.model.params.clone(),
        };
        self.scale * loss(&params, &self.patches, prior, &self.tokens)
    }

    fn analytic(&self, target: GradTarget) -> f64 {
        let (params, prior) = match target {
            GradTarget::Prior => (
                self.model.params.map_indexed(|_, &x| Dual::new(x, 0.0)),
                Dual::variable(self.prior),
            ),
            GradTarget::Weight(idx) => (
                self.model
                    .params
                    .map_indexed(|i, &x| Dual::new(x, if i == idx { 1.0 } else { 0.0 })),
                Dual::new(self.prior, 0.0),
            ),
        };
        let patches = self.patches.lift::<Dual>();
        self.scale * loss(&params, &patches, prior, &self.tokens).eps
    }

    fn numeric(&self, target: GradTarget) -> f64 {
        let h = FD_STEP;
        let (plus, minus) = match target {
            GradTarget::Prior => (self.value(self.prior + h, None), self.value(self.prior - h, None)),
            GradTarget::Weight(idx) => (
                self.value(self.prior, Some((idx, h))),
                self.value(self.prior, Some((idx, -h))),
            ),
        };
        (plus - minus) / (2.0 * h)
    }

    fn check(&self, target: GradTarget) -> GradCheck {
        let analytic = self.analytic(target);
        let numeric = self.numeric(target);
        GradCheck {
            target,
            analytic,
            numeric,
            rel_error: relative_error(analytic, numeric),
        }
    }
}

/// Weights drawn from the model seed, so the sample is reproducible.
pub fn sampled_weights(model: &ToyModel, count: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count).map(|_| rng.gen_range(0..model.param_count())).collect()
}

pub fn grad_check(model: &ToyModel, images: &ImagePair, prior: PriorScalar) -> Result<GradReport> {
    grad_check_scaled(model, images, prior, 1.0)
}

/// Same as [`grad_check`] with the loss multiplied by `scale`.
pub fn grad_check_scaled(
    model: &ToyModel,
    images: &ImagePair,
    prior: PriorScalar,
    scale: f64,
) -> Result<GradReport> {
    let tokens = forward(images, prior, model, model.config.max_len)?.tokens;
    let objective = Objective {
        model,
        patches: patches_for(images, model)?,
        prior: prior.0,
        tokens: tokens.clone(),
        scale,
    };
    let targets = std::iter::once(GradTarget::Prior)
        .chain(sampled_weights(model, SAMPLED_WEIGHTS).into_iter().map(GradTarget::Weight));
    let checks: Vec<GradCheck> = targets.map(|t| objective.check(t)).collect();
    let max_rel_error = checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(GradReport {
        tokens,
        checks,
        max_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(2.0, 1.0), 0.5);
    }

    #[test]
    fn fixture_gradients_agree() {
        let model = ToyModel::new(17);
        let report = grad_check(&model, &ImagePair::fixture(17, 16), PriorScalar(1.0)).unwrap();
        assert!(report.max_rel_error < 1e-4, "{report:#?}");
    }
}
