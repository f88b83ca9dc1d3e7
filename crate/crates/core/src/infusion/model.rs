use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::real::Real;
use super::tensor::Matrix;
use crate::error::{Error, Result};
use crate::labeler::PriorLabel;

pub const DEFAULT_SEED: u64 = 17;
pub const BOS: usize = 0;
pub const EOS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub image_size: usize,
    pub patch: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub vocab: usize,
    pub max_len: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            image_size: 16,
            patch: 8,
            d_model: 16,
            d_ff: 32,
            vocab: 32,
            max_len: 12,
        }
    }
}

impl ToyConfig {
    /// Patch rows per view.
    pub fn patches_per_view(&self) -> usize {
        let per_side = self.image_size / self.patch;
        per_side * per_side
    }

    /// `S`: frontal patches followed by lateral patches.
    pub fn seq_len(&self) -> usize {
        2 * self.patches_per_view()
    }

    pub fn patch_dim(&self) -> usize {
        self.patch * self.patch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagePair {
    pub frontal: Matrix<f64>,
    pub lateral: Matrix<f64>,
}

impl ImagePair {
    pub fn new(frontal: Matrix<f64>, lateral: Matrix<f64>) -> Self {
        ImagePair { frontal, lateral }
    }

    pub fn zeros(size: usize) -> Self {
        ImagePair::new(Matrix::zeros(size, size), Matrix::zeros(size, size))
    }

    /// Seeded synthetic images with pixels in `[0, 1)`.
    pub fn fixture(seed: u64, size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = || Matrix::from_fn(size, size, |_, _| rng.gen::<f64>());
        let frontal = grid();
        let lateral = grid();
        ImagePair { frontal, lateral }
    }

    pub fn swapped(&self) -> Self {
        ImagePair::new(self.lateral.clone(), self.frontal.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisualEmbedding(pub Matrix<f64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatentRepresentation(pub Matrix<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorScalar(pub f64);

impl From<&PriorLabel> for PriorScalar {
    fn from(label: &PriorLabel) -> Self {
        PriorScalar(f64::from(label.value))
    }
}

/// Where the prior is added. Disabling a site changes no weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InfusionSites {
    pub visual: bool,
    pub latent: bool,
}

impl InfusionSites {
    pub const BOTH: InfusionSites = InfusionSites {
        visual: true,
        latent: true,
    };
    pub const NONE: InfusionSites = InfusionSites {
        visual: false,
        latent: false,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attention<T> {
    pub wq: Matrix<T>,
    pub wk: Matrix<T>,
    pub wv: Matrix<T>,
    pub wo: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward<T> {
    pub w1: Matrix<T>,
    pub b1: Matrix<T>,
    pub w2: Matrix<T>,
    pub b2: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub visual: Matrix<T>,
    pub enc_attn: Attention<T>,
    pub enc_ff: FeedForward<T>,
    pub embed: Matrix<T>,
    pub dec_self: Attention<T>,
    pub dec_cross: Attention<T>,
    pub dec_ff: FeedForward<T>,
    pub out_w: Matrix<T>,
    pub out_b: Matrix<T>,
}

impl<T> Params<T> {
    /// Every weight matrix in a fixed order.
    pub fn matrices(&self) -> Vec<&Matrix<T>> {
        let Params {
            visual,
            enc_attn,
            enc_ff,
            embed,
            dec_self,
            dec_cross,
            dec_ff,
            out_w,
            out_b,
        } = self;
        let mut all = vec![visual];
        all.extend(attn_parts(enc_attn));
        all.extend(ff_parts(enc_ff));
        all.push(embed);
        all.extend(attn_parts(dec_self));
        all.extend(attn_parts(dec_cross));
        all.extend(ff_parts(dec_ff));
        all.push(out_w);
        all.push(out_b);
        all
    }

    pub fn count(&self) -> usize {
        self.matrices().iter().map(|m| m.data.len()).sum()
    }

    /// Rebuild with the same layout, mapping each element with its flat index.
    pub fn map_indexed<U>(&self, mut f: impl FnMut(usize, &T) -> U) -> Params<U> {
        let mut offset = 0;
        let mut m = |x: &Matrix<T>| {
            let data = x.data.iter().enumerate().map(|(i, v)| f(offset + i, v)).collect();
            offset += x.data.len();
            Matrix {
                rows: x.rows,
                cols: x.cols,
                data,
            }
        };
        let visual = m(&self.visual);
        let enc_attn = map_attn(&self.enc_attn, &mut m);
        let enc_ff = map_ff(&self.enc_ff, &mut m);
        let embed = m(&self.embed);
        let dec_self = map_attn(&self.dec_self, &mut m);
        let dec_cross = map_attn(&self.dec_cross, &mut m);
        let dec_ff = map_ff(&self.dec_ff, &mut m);
        let out_w = m(&self.out_w);
        let out_b = m(&self.out_b);
        Params {
            visual,
            enc_attn,
            enc_ff,
            embed,
            dec_self,
            dec_cross,
            dec_ff,
            out_w,
            out_b,
        }
    }
}

fn attn_parts<T>(a: &Attention<T>) -> [&Matrix<T>; 4] {
    [&a.wq, &a.wk, &a.wv, &a.wo]
}

fn ff_parts<T>(f: &FeedForward<T>) -> [&Matrix<T>; 4] {
    [&f.w1, &f.b1, &f.w2, &f.b2]
}

fn map_attn<T, U>(a: &Attention<T>, m: &mut impl FnMut(&Matrix<T>) -> Matrix<U>) -> Attention<U> {
    Attention {
        wq: m(&a.wq),
        wk: m(&a.wk),
        wv: m(&a.wv),
        wo: m(&a.wo),
    }
}

fn map_ff<T, U>(f: &FeedForward<T>, m: &mut impl FnMut(&Matrix<T>) -> Matrix<U>) -> FeedForward<U> {
    FeedForward {
        w1: m(&f.w1),
        b1: m(&f.b1),
        w2: m(&f.w2),
        b2: m(&f.b2),
    }
}

/// Seeded encoder-decoder. Weights are drawn once at construction and never
/// depend on the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    pub config: ToyConfig,
    pub seed: u64,
    pub params: Params<f64>,
}

impl ToyModel {
    pub fn new(seed: u64) -> Self {
        ToyModel::with_config(ToyConfig::default(), seed)
    }

    pub fn with_config(config: ToyConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let a = 1.0 / (fan_in as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-a..a))
        };
        let d = config.d_model;
        let ff = config.d_ff;
        let mut attn = || Attention {
            wq: uniform(d, d, d),
            wk: uniform(d, d, d),
            wv: uniform(d, d, d),
            wo: uniform(d, d, d),
        };
        let enc_attn = attn();
        let dec_self = attn();
        let dec_cross = attn();
        let mut feed = || FeedForward {
            w1: uniform(d, ff, d),
            b1: uniform(1, ff, d),
            w2: uniform(ff, d, ff),
            b2: uniform(1, d, ff),
        };
        let enc_ff = feed();
        let dec_ff = feed();
        let params = Params {
            visual: uniform(config.patch_dim(), d, config.patch_dim()),
            enc_attn,
            enc_ff,
            embed: uniform(config.vocab, d, 1),
            dec_self,
            dec_cross,
            dec_ff,
            out_w: uniform(d, config.vocab, d),
            out_b: uniform(1, config.vocab, d),
        };
        ToyModel {
            config,
            seed,
            params,
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.count()
    }

    /// Copy whose decoder ignores the latent representation entirely, so the
    /// output cannot depend on the prior.
    pub fn with_zeroed_memory(&self) -> Self {
        let mut m = self.clone();
        m.params.dec_cross.wv = Matrix::zeros(m.config.d_model, m.config.d_model);
        m
    }
}

/// Patch rows (frontal then lateral, row-major patches) projected to `d`.
pub fn visual_extract(images: &ImagePair, model: &ToyModel) -> Result<VisualEmbedding> {
    let patches = patch_rows(images, &model.config)?;
    Ok(VisualEmbedding(patches.matmul(&model.params.visual)))
}

fn patch_rows(images: &ImagePair, config: &ToyConfig) -> Result<Matrix<f64>> {
    let n = config.image_size;
    for (view, grid) in [("frontal image", &images.frontal), ("lateral image", &images.lateral)] {
        if grid.shape() != (n, n) {
            return Err(Error::Dimension {
                what: view,
                expected: format!("{n}x{n}"),
                actual: format!("{}x{}", grid.rows, grid.cols),
            });
        }
        if !grid.all_finite() {
            return Err(Error::NonFinite("image pixels"));
        }
    }
    let p = config.patch;
    let per_side = n / p;
    let mut data = Vec::with_capacity(config.seq_len() * config.patch_dim());
    for grid in [&images.frontal, &images.lateral] {
        for pr in 0..per_side {
            for pc in 0..per_side {
                for r in 0..p {
                    data.extend_from_slice(&grid.row(pr * p + r)[pc * p..(pc + 1) * p]);
                }
            }
        }
    }
    Ok(Matrix {
        rows: config.seq_len(),
        cols: config.patch_dim(),
        data,
    })
}

pub trait Infusable: Sized {
    fn infuse(&self, prior: PriorScalar) -> Self;
}

impl Infusable for Matrix<f64> {
    fn infuse(&self, prior: PriorScalar) -> Self {
        add_prior(self, prior.0)
    }
}

impl Infusable for VisualEmbedding {
    fn infuse(&self, prior: PriorScalar) -> Self {
        VisualEmbedding(self.0.infuse(prior))
    }
}

impl Infusable for LatentRepresentation {
    fn infuse(&self, prior: PriorScalar) -> Self {
        LatentRepresentation(self.0.infuse(prior))
    }
}

/// Element-wise `A + P`, broadcasting the scalar.
pub fn infuse<M: Infusable>(tensor: &M, prior: PriorScalar) -> M {
    tensor.infuse(prior)
}

/// Adding `-0.0` leaves every float unchanged bit for bit, whereas `+0.0`
/// turns `-0.0` into `+0.0`.
fn add_prior<T: Real>(m: &Matrix<T>, p: T) -> Matrix<T> {
    let p = if p.value() == 0.0 { p.with_value(-0.0) } else { p };
    m.map(|x| x + p)
}

fn positional<T: Real>(rows: usize, d: usize) -> Matrix<T> {
    Matrix::from_fn(rows, d, |pos, i| {
        let angle = pos as f64 / 10000f64.powf((i - i % 2) as f64 / d as f64);
        T::constant(if i % 2 == 0 { angle.sin() } else { angle.cos() })
    })
}

fn attend<T: Real>(a: &Attention<T>, queries: &Matrix<T>, keys: &Matrix<T>, causal: bool) -> Matrix<T> {
    let q = queries.matmul(&a.wq);
    let k = keys.matmul(&a.wk);
    let v = keys.matmul(&a.wv);
    let scale = T::constant(1.0 / (q.cols as f64).sqrt());
    let weights = q.matmul_t(&k).map(|x| x * scale).softmax_rows(|r, c| !causal || c <= r);
    weights.matmul(&v).matmul(&a.wo)
}

fn feed_forward<T: Real>(f: &FeedForward<T>, x: &Matrix<T>) -> Matrix<T> {
    x.matmul(&f.w1)
        .add_row(&f.b1)
        .map(Real::tanh)
        .matmul(&f.w2)
        .add_row(&f.b2)
}

/// Encoder pass from patch rows to `(L, L_new)`.
fn encode<T: Real>(
    params: &Params<T>,
    patches: &Matrix<T>,
    prior: T,
    sites: InfusionSites,
) -> (Matrix<T>, Matrix<T>) {
    let mut v = patches.matmul(&params.visual);
    if sites.visual {
        v = add_prior(&v, prior);
    }
    let x = v.add(&positional(v.rows, v.cols));
    let h = x.add(&attend(&params.enc_attn, &x, &x, false));
    let latent = h.add(&feed_forward(&params.enc_ff, &h));
    let latent_new = if sites.latent {
        add_prior(&latent, prior)
    } else {
        latent.clone()
    };
    (latent, latent_new)
}

/// Decoder logits for every prefix position of `tokens`.
fn decode<T: Real>(params: &Params<T>, tokens: &[usize], memory: &Matrix<T>) -> Matrix<T> {
    let d = params.embed.cols;
    let e = Matrix::from_fn(tokens.len(), d, |r, c| params.embed.get(tokens[r], c))
        .add(&positional(tokens.len(), d));
    let a = e.add(&attend(&params.dec_self, &e, &e, true));
    let c = a.add(&attend(&params.dec_cross, &a, memory, false));
    let h = c.add(&feed_forward(&params.dec_ff, &c));
    h.matmul(&params.out_w).add_row(&params.out_b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardOutput {
    /// Decoded tokens, without BOS and EOS.
    pub tokens: Vec<usize>,
    pub latent: LatentRepresentation,
    pub latent_new: LatentRepresentation,
}

pub fn forward(
    images: &ImagePair,
    prior: PriorScalar,
    model: &ToyModel,
    max_len: usize,
) -> Result<ForwardOutput> {
    forward_with(images, prior, model, max_len, InfusionSites::BOTH)
}

/// The model with the infusion step removed.
pub fn forward_baseline(images: &ImagePair, model: &ToyModel, max_len: usize) -> Result<ForwardOutput> {
    forward_with(images, PriorScalar(0.0), model, max_len, InfusionSites::NONE)
}

pub fn forward_with(
    images: &ImagePair,
    prior: PriorScalar,
    model: &ToyModel,
    max_len: usize,
    sites: InfusionSites,
) -> Result<ForwardOutput> {
    if max_len == 0 {
        return Err(Error::InvalidInput("max_len must be at least 1".into()));
    }
    if !prior.0.is_finite() {
        return Err(Error::NonFinite("prior"));
    }
    let patches = patch_rows(images, &model.config)?;
    let (latent, latent_new) = encode(&model.params, &patches, prior.0, sites);
    if !latent_new.all_finite() {
        return Err(Error::NonFinite("latent representation"));
    }
    let tokens = greedy_decode(&model.params, &latent_new, max_len)?;
    Ok(ForwardOutput {
        tokens,
        latent: LatentRepresentation(latent),
        latent_new: LatentRepresentation(latent_new),
    })
}

fn greedy_decode(params: &Params<f64>, memory: &Matrix<f64>, max_len: usize) -> Result<Vec<usize>> {
    let mut seq = vec![BOS];
    for _ in 0..max_len {
        let logits = decode(params, &seq, memory);
        if !logits.all_finite() {
            return Err(Error::NonFinite("decoder logits"));
        }
        let last = logits.row(logits.rows - 1);
        let next = last
            .iter()
            .enumerate()
            .fold(0, |best, (i, &x)| if x > last[best] { i } else { best });
        if next == EOS {
            break;
        }
        seq.push(next);
    }
    seq.remove(0);
    Ok(seq)
}

/// Sum of all teacher-forced decoder logits for `BOS` followed by `tokens`.
pub(crate) fn loss<T: Real>(
    params: &Params<T>,
    patches: &Matrix<T>,
    prior: T,
    tokens: &[usize],
) -> T {
    let (_, memory) = encode(params, patches, prior, InfusionSites::BOTH);
    let mut input = vec![BOS];
    input.extend_from_slice(tokens);
    decode(params, &input, &memory).sum()
}

pub(crate) fn patches_for(images: &ImagePair, model: &ToyModel) -> Result<Matrix<f64>> {
    patch_rows(images, &model.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_example() {
        let m = Matrix {
            rows: 1,
            cols: 2,
            data: vec![0.5, -0.5],
        };
        assert_eq!(infuse(&m, PriorScalar(1.0)).data, vec![1.5, 0.5]);
    }

    #[test]
    fn zero_prior_keeps_negative_zero() {
        let m = Matrix {
            rows: 1,
            cols: 3,
            data: vec![-0.0, 0.0, 2.5],
        };
        let out = infuse(&m, PriorScalar(0.0));
        let bits = |m: &Matrix<f64>| m.data.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&out), bits(&m));
    }

    #[test]
    fn default_shapes() {
        let model = ToyModel::new(DEFAULT_SEED);
        let v = visual_extract(&ImagePair::fixture(1, 16), &model).unwrap();
        assert_eq!(v.0.shape(), (8, 16));
        let out = forward(&ImagePair::fixture(1, 16), PriorScalar(1.0), &model, 12).unwrap();
        assert_eq!(out.latent_new.0.shape(), (8, 16));
        assert!(out.tokens.len() <= 12);
    }

    #[test]
    fn zero_images_give_zero_embedding() {
        let model = ToyModel::new(3);
        let v = visual_extract(&ImagePair::zeros(16), &model).unwrap();
        assert!(v.0.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_mismatch_names_shapes() {
        let model = ToyModel::new(3);
        let err = visual_extract(&ImagePair::zeros(12), &model).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("16x16") && msg.contains("12x12"), "{msg}");
    }

    #[test]
    fn same_seed_same_weights() {
        assert_eq!(ToyModel::new(5), ToyModel::new(5));
        assert_ne!(ToyModel::new(5).params, ToyModel::new(6).params);
    }

    #[test]
    fn map_indexed_visits_every_weight_once() {
        let model = ToyModel::new(2);
        let mut seen = Vec::new();
        let copy = model.params.map_indexed(|i, &x| {
            seen.push(i);
            x
        });
        assert_eq!(copy, model.params);
        assert_eq!(seen, (0..model.param_count()).collect::<Vec<_>>());
    }
}
