use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{sgns_step, ParamStore, Scratch};
use super::{Embedding, EmbeddingMetadata, Hyperparams, ModelState, NoiseSampler, Result, SgnsError};
use crate::corpus::SentenceCorpus;

const WINDOW_STREAM: u64 = 1;
const NEGATIVE_STREAM: u64 = 2;
/// Per-worker streams start here: worker `w` uses `WORKER_STREAM + 2w` and `+ 2w + 1`.
const WORKER_STREAM: u64 = 1_000;
const MAX_RESAMPLE: usize = 100;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrainStats {
    pub pair_count: u64,
    pub wall_clock_seconds: f64,
}

pub fn train(corpus: &SentenceCorpus, hp: &Hyperparams) -> Result<Embedding> {
    train_with_observer(corpus, hp, |_, _| {}).map(|(e, _)| e)
}

/// Train and call `observer(epoch, &state)` once before the first epoch
/// (epoch 0) and after every completed epoch.
pub fn train_with_observer<F>(
    corpus: &SentenceCorpus,
    hp: &Hyperparams,
    mut observer: F,
) -> Result<(Embedding, TrainStats)>
where
    F: FnMut(usize, &ModelState),
{
    hp.validate()?;
    if corpus.sentences.is_empty() {
        return Err(SgnsError::EmptyCorpus);
    }
    if let Some(s) = corpus.sentences.iter().find(|s| s.tokens.len() < 2) {
        return Err(SgnsError::DegenerateSentence {
            date: s.date,
            len: s.tokens.len(),
        });
    }
    let started = Instant::now();
    let mut state = ModelState::init(&corpus.vocabulary, hp)?;
    let sentences: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|s| s.tokens.iter().map(|t| state.token_id(t)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    observer(0, &state);
    let pair_count = if hp.workers == 1 {
        train_single(&mut state, &sentences, hp, &mut observer)?
    } else {
        train_parallel(&mut state, &sentences, hp, &mut observer)?
    };

    let stats = TrainStats {
        pair_count,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let metadata = EmbeddingMetadata {
        hyperparams: hp.clone(),
        corpus_fingerprint: corpus.fingerprint(),
        pair_count,
        wall_clock_seconds: stats.wall_clock_seconds,
    };
    Ok((
        Embedding::new(state.vocabulary().to_vec(), hp.dimension, state.input.clone(), Some(metadata)),
        stats,
    ))
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn pairs_at(len: usize, pos: usize, reach: usize) -> u64 {
    (pos.min(reach) + (len - 1 - pos).min(reach)) as u64
}

/// Exact number of pairs a window stream will generate over `epochs` passes.
fn count_pairs(sentences: &[Vec<usize>], window: usize, epochs: usize, mut rng: ChaCha8Rng) -> u64 {
    let mut total = 0;
    for _ in 0..epochs {
        for s in sentences {
            for pos in 0..s.len() {
                let reach = rng.random_range(1..=window);
                total += pairs_at(s.len(), pos, reach);
            }
        }
    }
    total
}

struct Schedule {
    alpha: f64,
    min_alpha: f64,
    total: u64,
}

impl Schedule {
    fn rate(&self, done: u64) -> f64 {
        let frac = (done as f64 / self.total.max(1) as f64).min(1.0);
        self.alpha - (self.alpha - self.min_alpha) * frac
    }
}

fn draw_negatives<R: Rng>(
    noise: &NoiseSampler,
    context: usize,
    k: usize,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    out.clear();
    for _ in 0..k {
        for _ in 0..MAX_RESAMPLE {
            let n = noise.sample(rng);
            if n != context {
                out.push(n);
                break;
            }
        }
    }
}

/// Runs one pass over `sentences`, returning the number of pairs processed.
#[allow(clippy::too_many_arguments)]
fn run_pass<S: ParamStore>(
    store: &mut S,
    noise: &NoiseSampler,
    sentences: &[Vec<usize>],
    hp: &Hyperparams,
    schedule: &Schedule,
    progress: &dyn Fn(u64) -> u64,
    window_rng: &mut ChaCha8Rng,
    negative_rng: &mut ChaCha8Rng,
) -> u64 {
    let mut scratch = Scratch::new(hp.dimension, hp.negatives);
    let mut negatives = Vec::with_capacity(hp.negatives);
    let mut pairs = 0;
    for s in sentences {
        for (pos, &center) in s.iter().enumerate() {
            let reach = window_rng.random_range(1..=hp.window);
            let lo = pos.saturating_sub(reach);
            let hi = (pos + reach).min(s.len() - 1);
            for (j, &context) in s.iter().enumerate().take(hi + 1).skip(lo) {
                if j == pos {
                    continue;
                }
                let done = progress(1);
                let alpha = schedule.rate(done);
                draw_negatives(noise, context, hp.negatives, negative_rng, &mut negatives);
                sgns_step(store, center, context, &negatives, alpha, &mut scratch);
                pairs += 1;
            }
        }
    }
    pairs
}

fn train_single<F>(
    state: &mut ModelState,
    sentences: &[Vec<usize>],
    hp: &Hyperparams,
    observer: &mut F,
) -> Result<u64>
where
    F: FnMut(usize, &ModelState),
{
    let schedule = Schedule {
        alpha: hp.alpha,
        min_alpha: hp.min_alpha,
        total: count_pairs(sentences, hp.window, hp.epochs, stream_rng(hp.seed, WINDOW_STREAM)),
    };
    let mut window_rng = stream_rng(hp.seed, WINDOW_STREAM);
    let mut negative_rng = stream_rng(hp.seed, NEGATIVE_STREAM);
    let noise = state.noise().clone();
    let done = std::cell::Cell::new(0u64);
    let progress = |n: u64| {
        let before = done.get();
        done.set(before + n);
        before
    };
    for epoch in 1..=hp.epochs {
        run_pass(
            state,
            &noise,
            sentences,
            hp,
            &schedule,
            &progress,
            &mut window_rng,
            &mut negative_rng,
        );
        if !state.all_finite() {
            return Err(SgnsError::NonFinite { epoch });
        }
        observer(epoch, state);
    }
    Ok(done.get())
}

/// Vectors shared between workers. Loads and stores are relaxed and
/// read-modify-write sequences are not atomic: concurrent updates to the
/// same row may be lost.
struct SharedVectors {
    dim: usize,
    input: Vec<AtomicU64>,
    output: Vec<AtomicU64>,
}

impl SharedVectors {
    fn from_state(state: &ModelState) -> Self {
        let wrap = |v: &[f64]| v.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        Self {
            dim: state.dim(),
            input: wrap(&state.input),
            output: wrap(&state.output),
        }
    }

    fn copy_into(&self, state: &mut ModelState) {
        for (dst, src) in state.input.iter_mut().zip(&self.input) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
        for (dst, src) in state.output.iter_mut().zip(&self.output) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
    }
}

struct SharedHandle<'a>(&'a SharedVectors);

fn load_row(cells: &[AtomicU64], dim: usize, row: usize, buf: &mut [f64]) {
    for (b, c) in buf.iter_mut().zip(&cells[row * dim..(row + 1) * dim]) {
        *b = f64::from_bits(c.load(Ordering::Relaxed));
    }
}

fn axpy_row(cells: &[AtomicU64], dim: usize, row: usize, a: f64, x: &[f64]) {
    for (c, v) in cells[row * dim..(row + 1) * dim].iter().zip(x) {
        let cur = f64::from_bits(c.load(Ordering::Relaxed));
        c.store((cur + a * v).to_bits(), Ordering::Relaxed);
    }
}

impl ParamStore for SharedHandle<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn load_input(&self, row: usize, buf: &mut [f64]) {
        load_row(&self.0.input, self.0.dim, row, buf);
    }

    fn load_output(&self, row: usize, buf: &mut [f64]) {
        load_row(&self.0.output, self.0.dim, row, buf);
    }

    fn axpy_input(&mut self, row: usize, a: f64, x: &[f64]) {
        axpy_row(&self.0.input, self.0.dim, row, a, x);
    }

    fn axpy_output(&mut self, row: usize, a: f64, x: &[f64]) {
        axpy_row(&self.0.output, self.0.dim, row, a, x);
    }
}

fn train_parallel<F>(
    state: &mut ModelState,
    sentences: &[Vec<usize>],
    hp: &Hyperparams,
    observer: &mut F,
) -> Result<u64>
where
    F: FnMut(usize, &ModelState),
{
    let workers = hp.workers.min(sentences.len());
    let chunk = sentences.len().div_ceil(workers);
    let parts: Vec<&[Vec<usize>]> = sentences.chunks(chunk).collect();

    let mut rngs: Vec<(ChaCha8Rng, ChaCha8Rng)> = (0..parts.len() as u64)
        .map(|w| {
            (
                stream_rng(hp.seed, WORKER_STREAM + 2 * w),
                stream_rng(hp.seed, WORKER_STREAM + 2 * w + 1),
            )
        })
        .collect();
    let total: u64 = parts
        .iter()
        .zip(&rngs)
        .map(|(p, (w, _))| count_pairs(p, hp.window, hp.epochs, w.clone()))
        .sum();
    let schedule = Schedule {
        alpha: hp.alpha,
        min_alpha: hp.min_alpha,
        total,
    };
    let noise = state.noise().clone();
    let shared = SharedVectors::from_state(state);
    let done = AtomicU64::new(0);

    for epoch in 1..=hp.epochs {
        std::thread::scope(|scope| {
            for (part, (window_rng, negative_rng)) in parts.iter().zip(rngs.iter_mut()) {
                let (shared, noise, schedule, done) = (&shared, &noise, &schedule, &done);
                scope.spawn(move || {
                    let progress = |n: u64| done.fetch_add(n, Ordering::Relaxed);
                    let mut handle = SharedHandle(shared);
                    run_pass(&mut handle, noise, part, hp, schedule, &progress, window_rng, negative_rng);
                });
            }
        });
        shared.copy_into(state);
        if !state.all_finite() {
            return Err(SgnsError::NonFinite { epoch });
        }
        observer(epoch, state);
    }
    Ok(done.load(Ordering::Relaxed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Order, Sentence};
    use chrono::NaiveDate;
    use std::collections::BTreeMap;

    fn corpus(sentences: Vec<Vec<&str>>) -> SentenceCorpus {
        let sentences: Vec<Sentence> = sentences
            .into_iter()
            .enumerate()
            .map(|(i, toks)| Sentence {
                date: NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() + chrono::Days::new(i as u64),
                tokens: toks.into_iter().map(String::from).collect(),
            })
            .collect();
        let mut vocabulary = BTreeMap::new();
        for s in &sentences {
            for t in &s.tokens {
                *vocabulary.entry(t.clone()).or_insert(0) += 1;
            }
        }
        SentenceCorpus {
            sentences,
            vocabulary,
            order: Order::Descending,
            dropped_days: 0,
        }
    }

    #[test]
    fn pair_count_matches_window_replay() {
        let c = corpus(vec![vec!["A", "B", "C", "D"]; 10]);
        let hp = Hyperparams {
            epochs: 3,
            window: 2,
            ..Default::default()
        };
        let (_, stats) = train_with_observer(&c, &hp, |_, _| {}).unwrap();
        let expected = count_pairs(
            &vec![vec![0, 1, 2, 3]; 10],
            2,
            3,
            stream_rng(hp.seed, WINDOW_STREAM),
        );
        assert_eq!(stats.pair_count, expected);
        // every center sees at least one neighbour, at most 2*window
        assert!(expected >= 3 * 10 * 4 && expected <= 3 * 10 * 4 * 3);
    }

    #[test]
    fn degenerate_and_empty() {
        let c = corpus(vec![vec!["A"]]);
        assert!(matches!(
            train(&c, &Hyperparams::default()),
            Err(SgnsError::DegenerateSentence { len: 1, .. })
        ));
        let c = corpus(vec![]);
        assert!(matches!(train(&c, &Hyperparams::default()), Err(SgnsError::EmptyCorpus)));
    }

    #[test]
    fn observer_sees_every_epoch() {
        let c = corpus(vec![vec!["A", "B", "C"]; 5]);
        let mut seen = vec![];
        train_with_observer(&c, &Hyperparams { epochs: 4, ..Default::default() }, |e, s| {
            assert!(s.all_finite());
            seen.push(e)
        })
        .unwrap();
        assert_eq!(seen, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn multi_worker_runs_and_stays_finite() {
        let c = corpus(vec![vec!["A", "B", "C", "D", "E"]; 40]);
        let hp = Hyperparams {
            workers: 4,
            ..Default::default()
        };
        let (e, stats) = train_with_observer(&c, &hp, |_, _| {}).unwrap();
        assert!(stats.pair_count > 0);
        assert!(e.vectors().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn learning_rate_decays_linearly() {
        let s = Schedule {
            alpha: 0.025,
            min_alpha: 0.0001,
            total: 100,
        };
        assert_eq!(s.rate(0), 0.025);
        assert!((s.rate(50) - (0.025 + 0.0001) / 2.0).abs() < 1e-15);
        assert!((s.rate(100) - 0.0001).abs() < 1e-15);
    }
}
