use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Hyperparams, NoiseSampler, Result, SgnsError};

/// Stream ids carved out of the master seed.
pub(crate) const INIT_STREAM: u64 = 0;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    // ln σ(x) = -softplus(-x)
    let z = -x;
    -(z.max(0.0) + (-z.abs()).exp().ln_1p())
}

/// Input and output vectors plus the noise distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    pub(crate) input: Vec<f64>,
    pub(crate) output: Vec<f64>,
    noise: NoiseSampler,
}

impl ModelState {
    /// Input vectors uniform on `[-0.5/d, 0.5/d)`, output vectors zero.
    pub fn init(vocabulary: &BTreeMap<String, u64>, hp: &Hyperparams) -> Result<Self> {
        if vocabulary.is_empty() {
            return Err(SgnsError::EmptyVocabulary);
        }
        hp.validate()?;
        let dim = hp.dimension;
        let tokens: Vec<String> = vocabulary.keys().cloned().collect();
        let counts: Vec<u64> = vocabulary.values().copied().collect();

        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        rng.set_stream(INIT_STREAM);
        let input: Vec<f64> = (0..tokens.len() * dim)
            .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
            .collect();

        Ok(Self {
            index: tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect(),
            vocabulary: tokens,
            dim,
            input,
            output: vec![0.0; counts.len() * dim],
            noise: NoiseSampler::new(&counts, hp.noise_exponent),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn noise(&self) -> &NoiseSampler {
        &self.noise
    }

    pub fn token_id(&self, token: &str) -> Result<usize> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| SgnsError::UnknownToken(token.to_string()))
    }

    pub fn input_vector(&self, id: usize) -> &[f64] {
        &self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_vector(&self, id: usize) -> &[f64] {
        &self.output[id * self.dim..(id + 1) * self.dim]
    }

    pub fn input_vector_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_vector_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.output[id * self.dim..(id + 1) * self.dim]
    }

    pub fn all_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|v| v.is_finite())
    }

    fn ids(&self, center: &str, context: &str, negatives: &[&str]) -> Result<(usize, usize, Vec<usize>)> {
        let c = self.token_id(center)?;
        let o = self.token_id(context)?;
        let negs = negatives
            .iter()
            .map(|n| {
                let id = self.token_id(n)?;
                if id == o {
                    Err(SgnsError::NegativeIsContext(n.to_string()))
                } else {
                    Ok(id)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((c, o, negs))
    }

    /// `-ln σ(u_c·v_o) - Σ ln σ(-u_c·v_n)` for one (center, context) pair.
    pub fn pair_loss(&self, center: &str, context: &str, negatives: &[&str]) -> Result<f64> {
        let (c, o, negs) = self.ids(center, context, negatives)?;
        Ok(self.pair_loss_ids(c, o, &negs))
    }

    pub fn pair_loss_ids(&self, center: usize, context: usize, negatives: &[usize]) -> f64 {
        let u = self.input_vector(center);
        let mut loss = -log_sigmoid(dot(u, self.output_vector(context)));
        for &n in negatives {
            loss -= log_sigmoid(-dot(u, self.output_vector(n)));
        }
        loss
    }

    /// One exact gradient-descent step on [`ModelState::pair_loss`] with rate `alpha`.
    pub fn pair_update(&mut self, center: &str, context: &str, negatives: &[&str], alpha: f64) -> Result<()> {
        let (c, o, negs) = self.ids(center, context, negatives)?;
        if alpha < 0.0 || !alpha.is_finite() {
            return Err(SgnsError::InvalidArgument(format!("learning rate {alpha}")));
        }
        let mut scratch = Scratch::new(self.dim, negs.len());
        sgns_step(self, c, o, &negs, alpha, &mut scratch);
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row access used by the update kernel, so the same step serves the
/// exclusive single-worker state and the shared multi-worker vectors.
pub(crate) trait ParamStore {
    fn dim(&self) -> usize;
    fn load_input(&self, row: usize, buf: &mut [f64]);
    fn load_output(&self, row: usize, buf: &mut [f64]);
    /// `input[row] += a * x`
    fn axpy_input(&mut self, row: usize, a: f64, x: &[f64]);
    /// `output[row] += a * x`
    fn axpy_output(&mut self, row: usize, a: f64, x: &[f64]);
}

impl ParamStore for ModelState {
    fn dim(&self) -> usize {
        self.dim
    }

    fn load_input(&self, row: usize, buf: &mut [f64]) {
        buf.copy_from_slice(self.input_vector(row));
    }

    fn load_output(&self, row: usize, buf: &mut [f64]) {
        buf.copy_from_slice(self.output_vector(row));
    }

    fn axpy_input(&mut self, row: usize, a: f64, x: &[f64]) {
        for (r, v) in self.input_vector_mut(row).iter_mut().zip(x) {
            *r += a * v;
        }
    }

    fn axpy_output(&mut self, row: usize, a: f64, x: &[f64]) {
        for (r, v) in self.output_vector_mut(row).iter_mut().zip(x) {
            *r += a * v;
        }
    }
}

pub(crate) struct Scratch {
    u: Vec<f64>,
    grad_u: Vec<f64>,
    targets: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(dim: usize, negatives: usize) -> Self {
        Self {
            u: vec![0.0; dim],
            grad_u: vec![0.0; dim],
            targets: vec![0.0; dim * (negatives + 1)],
            coeffs: vec![0.0; negatives + 1],
        }
    }
}

/// Gradient step for one pair. All scores and gradients are taken at the
/// pre-step parameters, so a negative drawn twice contributes twice.
pub(crate) fn sgns_step<S: ParamStore>(
    store: &mut S,
    center: usize,
    context: usize,
    negatives: &[usize],
    alpha: f64,
    scratch: &mut Scratch,
) {
    if alpha == 0.0 {
        return;
    }
    let d = store.dim();
    let n_targets = negatives.len() + 1;
    if scratch.coeffs.len() < n_targets {
        *scratch = Scratch::new(d, negatives.len());
    }
    store.load_input(center, &mut scratch.u);
    for k in 0..n_targets {
        let row = if k == 0 { context } else { negatives[k - 1] };
        store.load_output(row, &mut scratch.targets[k * d..(k + 1) * d]);
    }

    scratch.grad_u.iter_mut().for_each(|g| *g = 0.0);
    for k in 0..n_targets {
        let v = &scratch.targets[k * d..(k + 1) * d];
        let label = if k == 0 { 1.0 } else { 0.0 };
        // dL/ds for s = u·v
        let g = sigmoid(dot(&scratch.u, v)) - label;
        scratch.coeffs[k] = g;
        for (gu, vi) in scratch.grad_u.iter_mut().zip(v) {
            *gu += g * vi;
        }
    }

    for k in 0..n_targets {
        let row = if k == 0 { context } else { negatives[k - 1] };
        store.axpy_output(row, -alpha * scratch.coeffs[k], &scratch.u);
    }
    store.axpy_input(center, -alpha, &scratch.grad_u);
}
