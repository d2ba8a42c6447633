//! Empirical counts drawn from an exact distribution.

use crate::algebra::Distribution;
use crate::rng::SplitMix64;

/// A sampled outcome; `Diverge` collects the missing mass of a
/// subdistribution.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<K> {
    Value(K),
    Diverge,
}

/// Draws `shots` samples by inverse-CDF lookup on a splitmix64 stream.
/// Counts are listed in support order, with `Diverge` last; outcomes never
/// drawn are omitted.
pub fn sample<K: Clone>(d: &Distribution<K>, seed: u64, shots: u64) -> Vec<(Outcome<K>, u64)> {
    let mut cdf = Vec::with_capacity(d.entries.len());
    let mut acc = 0.0;
    for (_, w) in &d.entries {
        acc += w.max(0.0);
        cdf.push(acc);
    }
    let mut counts = vec![0u64; d.entries.len()];
    let mut diverged = 0u64;
    let mut rng = SplitMix64::new(seed);
    for _ in 0..shots {
        let u = rng.next_f64();
        match cdf.iter().position(|&c| u < c) {
            Some(i) => counts[i] += 1,
            None => diverged += 1,
        }
    }
    let mut out: Vec<(Outcome<K>, u64)> = d
        .entries
        .iter()
        .zip(counts)
        .filter(|(_, n)| *n > 0)
        .map(|((k, _), n)| (Outcome::Value(k.clone()), n))
        .collect();
    if diverged > 0 {
        out.push((Outcome::Diverge, diverged));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass() {
        let d = Distribution::point(0u8);
        assert_eq!(sample(&d, 9, 100), vec![(Outcome::Value(0), 100)]);
    }

    #[test]
    fn empty_diverges() {
        let d: Distribution<u8> = Distribution::empty();
        assert_eq!(sample(&d, 1, 10), vec![(Outcome::Diverge, 10)]);
    }

    #[test]
    fn fair_coin_within_three_sigma() {
        let d = Distribution { entries: vec![(0u8, 0.5), (1u8, 0.5)] };
        let s = sample(&d, 42, 10_000);
        for (_, n) in &s {
            assert!((*n as f64 - 5000.0).abs() <= 150.0);
        }
        assert_eq!(s, sample(&d, 42, 10_000));
    }
}
