use rand::Rng;

/// Draws tokens with probability proportional to `count^exponent`, in O(1)
/// per draw via Vose's alias method.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSampler {
    probabilities: Vec<f64>,
    /// Chance of keeping the bucket's own token rather than its alias.
    keep: Vec<f64>,
    alias: Vec<usize>,
}

impl NoiseSampler {
    pub fn new(counts: &[u64], exponent: f64) -> Self {
        let raw: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(exponent)).collect();
        let total: f64 = raw.iter().sum();
        let probabilities: Vec<f64> = raw.iter().map(|w| w / total).collect();

        let n = probabilities.len();
        let mut scaled: Vec<f64> = probabilities.iter().map(|p| p * n as f64).collect();
        let mut keep = vec![1.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            keep[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        Self {
            probabilities,
            keep,
            alias,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.keep.len());
        if rng.random::<f64>() < self.keep[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_counts_give_uniform_noise() {
        let s = NoiseSampler::new(&[7, 7, 7, 7], 0.75);
        for p in s.probabilities() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn alias_table_reproduces_probabilities() {
        let s = NoiseSampler::new(&[3, 1, 40, 7, 7, 900], 0.75);
        let n = s.len() as f64;
        let mut mass = vec![0.0; s.len()];
        for i in 0..s.len() {
            mass[i] += s.keep[i] / n;
            mass[s.alias[i]] += (1.0 - s.keep[i]) / n;
        }
        for (m, p) in mass.iter().zip(s.probabilities()) {
            assert!((m - p).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized() {
        let s = NoiseSampler::new(&[1, 20, 300, 4000], 0.75);
        let sum: f64 = s.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_frequencies_match_weights() {
        let counts = [1u64, 5, 10, 50, 200];
        let s = NoiseSampler::new(&counts, 0.75);
        // analytic expectation, computed independently of the sampler
        let w: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let z: f64 = w.iter().sum();

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 1_000_000;
        let mut hits = [0usize; 5];
        for _ in 0..draws {
            hits[s.sample(&mut rng)] += 1;
        }
        for i in 0..5 {
            let freq = hits[i] as f64 / draws as f64;
            assert!((freq - w[i] / z).abs() < 0.01, "token {i}: {freq} vs {}", w[i] / z);
        }
    }
}
