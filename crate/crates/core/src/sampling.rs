//! Seeded generators for random maps and measure pairs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::measures::AtomicMeasure;
use crate::pwa::PwaMap;
use crate::rational::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random continuous map with at most `max_pieces` pieces whose nodes lie on
/// the grid `1/den`.
pub fn random_pwa(rng: &mut impl Rng, max_pieces: usize, den: i64) -> PwaMap {
    let pieces = rng.gen_range(1..=max_pieces.min(den as usize));
    let mut cuts: Vec<i64> = Vec::new();
    while cuts.len() < pieces - 1 {
        let c = rng.gen_range(1..den);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let xs = std::iter::once(0).chain(cuts).chain(std::iter::once(den));
    let nodes = xs.map(|x| (Rational::new(x, den), Rational::new(rng.gen_range(0..=den), den))).collect();
    PwaMap::from_nodes(nodes).expect("grid nodes are valid")
}

/// Random rational in the open interval `(lo, hi)` with denominator `den`
/// relative to the interval.
pub fn random_inside(rng: &mut impl Rng, iv: &Interval, den: i64) -> Rational {
    let k = rng.gen_range(1..den);
    &iv.lo + iv.length() * Rational::new(k, den)
}

/// Random weights with denominator `den` summing to one.
pub fn random_weights(rng: &mut impl Rng, count: usize, den: i64) -> Vec<Rational> {
    let raw: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=den)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| Rational::new(w, total)).collect()
}

/// Two atomic measures carried by `m` disjoint intervals of length at most
/// `1/q`, whose masses on each interval differ by at most `1/(qm)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurePair {
    pub q: u64,
    pub intervals: Vec<Interval>,
    pub mu: AtomicMeasure,
    pub nu: AtomicMeasure,
}

pub fn measure_pair(rng: &mut impl Rng, q: u64, max_intervals: usize) -> MeasurePair {
    let m = rng.gen_range(1..=max_intervals);
    let slot = Rational::new(1, m as i64);
    let cap = Rational::min_of(&Rational::new(1, q as i64), &slot);
    let intervals: Vec<Interval> = (0..m)
        .map(|j| {
            let start = &slot * Rational::integer(j as i64);
            let len = &cap * Rational::new(rng.gen_range(1..=7), 8);
            let room = &slot - &len;
            let lo = start + room * Rational::new(rng.gen_range(0..=3), 4);
            Interval::closed(lo.clone(), lo + len)
        })
        .collect();
    let masses = random_weights(rng, m, 16);
    let tol = Rational::new(1, (q as i64) * m as i64);
    // shift mass between neighbouring intervals by at most tol/2 each
    let mut shifted = masses.clone();
    for j in 0..m.saturating_sub(1) {
        let t = Rational::min_of(&(&tol / Rational::integer(2)), &shifted[j]) * Rational::new(rng.gen_range(0..=3), 4);
        shifted[j] -= &t;
        shifted[j + 1] += t;
    }
    let mut mu_atoms = Vec::new();
    let mut nu_atoms = Vec::new();
    for (j, iv) in intervals.iter().enumerate() {
        mu_atoms.extend(spread(rng, iv, &masses[j]));
        nu_atoms.extend(spread(rng, iv, &shifted[j]));
    }
    MeasurePair {
        q,
        intervals,
        mu: AtomicMeasure::new(mu_atoms).expect("valid atoms"),
        nu: AtomicMeasure::new(nu_atoms).expect("valid atoms"),
    }
}

/// Between one and three atoms inside `iv` carrying total mass `mass`.
fn spread(rng: &mut impl Rng, iv: &Interval, mass: &Rational) -> Vec<(Rational, Rational)> {
    let k = rng.gen_range(1..=3);
    random_weights(rng, k, 8)
        .into_iter()
        .map(|w| (&iv.lo + iv.length() * Rational::new(rng.gen_range(0..=16), 16), w * mass))
        .filter(|(_, w)| w.is_positive())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_maps_repeat() {
        let a = random_pwa(&mut rng(7), 5, 12);
        let b = random_pwa(&mut rng(7), 5, 12);
        assert_eq!(a, b);
        assert!(a.piece_count() <= 5);
    }

    #[test]
    fn pair_masses_close() {
        for seed in 0..50 {
            let p = measure_pair(&mut rng(seed), 9, 8);
            let tol = Rational::new(1, 9 * p.intervals.len() as i64);
            for iv in &p.intervals {
                assert!(iv.length() <= Rational::new(1, 9));
                assert!((p.mu.mass_in(iv) - p.nu.mass_in(iv)).abs() <= tol);
            }
            for w in p.intervals.windows(2) {
                assert!(!w[0].intersects(&w[1]));
            }
        }
    }
}
