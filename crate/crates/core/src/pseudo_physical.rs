//! Finite probes of pseudo-physicality: grid-sampled basins, recognition of
//! q-shrinked periodic measures, and the functional that separates a
//! shrinking periodic measure from its convex combinations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::{birkhoff_empirical, integrate, weakstar_distance, AtomicMeasure};
use crate::pwa::PwaMap;
use crate::rational::Rational;
use crate::shrinking::{orbit_measure, recheck, ShrinkingCertificate};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasinEstimate {
    pub mu: AtomicMeasure,
    pub epsilon: Rational,
    pub grid_size: usize,
    pub horizon: usize,
    pub truncation: usize,
    pub hits: usize,
    pub hit_fraction: Rational,
}

/// Grid point `(2i+1)/(2·grid_size)`.
pub fn grid_point(i: usize, grid_size: usize) -> Rational {
    Rational::new(2 * i as i64 + 1, 2 * grid_size as i64)
}

/// Share of grid points whose horizon-`n` empirical measure lies within `ε`
/// of `μ`, counting the truncation tail against `ε`.
pub fn basin_estimate(
    map: &PwaMap,
    mu: &AtomicMeasure,
    epsilon: &Rational,
    grid_size: usize,
    horizon: usize,
    truncation: usize,
) -> Result<BasinEstimate> {
    if grid_size < 2 || horizon == 0 || truncation == 0 {
        return Err(LabError::Domain("need grid_size >= 2, horizon >= 1 and N >= 1".into()));
    }
    let hits = (0..grid_size)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let emp = birkhoff_empirical(map, &grid_point(i, grid_size), horizon)?;
            Ok(weakstar_distance(&emp, mu, truncation)?.upper_bound() < *epsilon)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&h| h)
        .count();
    Ok(BasinEstimate {
        mu: mu.clone(),
        epsilon: epsilon.clone(),
        grid_size,
        horizon,
        truncation,
        hits,
        hit_fraction: Rational::new(hits as i64, grid_size as i64),
    })
}

/// Period `r` when `ν` is the uniform measure on an `r`-cycle of `map`.
pub fn orbit_period(map: &PwaMap, nu: &AtomicMeasure) -> Result<usize> {
    let r = nu.len();
    let w = Rational::new(1, r as i64);
    if nu.atoms().iter().any(|(_, m)| *m != w) {
        return Err(LabError::Domain("weights are not uniform".into()));
    }
    let start = nu.atoms()[0].0.clone();
    let mut x = start.clone();
    for step in 1..=r {
        x = map.eval_in_domain(&x);
        if x == start {
            return if step == r {
                Ok(r)
            } else {
                Err(LabError::Domain(format!("cycle of length {step} is shorter than the support")))
            };
        }
        if nu.atoms().binary_search_by(|(p, _)| p.cmp(&x)).is_err() {
            return Err(LabError::Domain(format!("{x} leaves the support")));
        }
    }
    Err(LabError::Domain("support is not a single periodic orbit".into()))
}

pub fn is_q_shrinked_periodic(map: &PwaMap, nu: &AtomicMeasure, q: u64, cert: &ShrinkingCertificate) -> Result<bool> {
    let r = orbit_period(map, nu)?;
    if q == 0 {
        return Err(LabError::Domain("q must be positive".into()));
    }
    if !recheck(map, cert).is_accepted() {
        return Ok(false);
    }
    let short = cert.periodic_interval.length() < Rational::new(1, q as i64);
    let inside = nu.support().all(|x| cert.images.iter().any(|im| im.contains(x)));
    Ok(short && inside && r % cert.period == 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub psi: PwaMap,
    pub p: usize,
    pub lambda: Rational,
    pub mu1: AtomicMeasure,
    pub integral_mu1: Rational,
    pub integral_mu2: Rational,
    pub integral_combo: Rational,
}

impl SeparationReport {
    /// `0 < ∫ψ dν < 1/p`.
    pub fn sandwich_holds(&self) -> bool {
        self.integral_combo.is_positive() && self.integral_combo < Rational::new(1, self.p as i64)
    }
}

/// ψ is 1 on `f^p(Ī)`, 0 off `I`, affine on the two gaps in between.
pub fn separation_functional(
    map: &PwaMap,
    cert: &ShrinkingCertificate,
    mu2: &AtomicMeasure,
    lambda: &Rational,
) -> Result<SeparationReport> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(LabError::Domain(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    if !recheck(map, cert).is_accepted() {
        return Err(LabError::Precondition("certificate does not verify".into()));
    }
    if let Some(x) = mu2.support().find(|x| cert.images.iter().any(|im| im.contains(x))) {
        return Err(LabError::Precondition(format!("second measure charges {x} inside the shrinking orbit")));
    }
    let p = cert.period;
    let iv = &cert.periodic_interval;
    let mut inner = iv.closure();
    for _ in 0..p {
        inner = map.image_of_interval(&inner)?;
    }
    if inner == iv.closure() {
        return Err(LabError::Precondition("degenerate geometry: the return image fills the interval".into()));
    }
    let mut nodes = vec![
        (Rational::zero(), Rational::zero()),
        (Rational::one(), Rational::zero()),
        (inner.lo.clone(), Rational::one()),
        (inner.hi.clone(), Rational::one()),
    ];
    if inner.lo > iv.lo {
        nodes.push((iv.lo.clone(), Rational::zero()));
    }
    if inner.hi < iv.hi {
        nodes.push((iv.hi.clone(), Rational::zero()));
    }
    nodes.retain(|(x, y)| !(y.is_zero() && (*x == inner.lo || *x == inner.hi)));
    let psi = PwaMap::from_nodes(nodes)?;
    let mu1 = orbit_measure(map, cert)?;
    let combo = AtomicMeasure::convex_combination(lambda, &mu1, mu2)?;
    Ok(SeparationReport {
        integral_mu1: integrate(&psi, &mu1),
        integral_mu2: integrate(&psi, mu2),
        integral_combo: integrate(&psi, &combo),
        psi,
        p,
        lambda: lambda.clone(),
        mu1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::rational::q;
    use crate::shrinking::verify_periodic_shrinking;
    use proptest::prelude::*;

    fn plateau_map() -> PwaMap {
        PwaMap::from_nodes(vec![(q(0, 1), q(0, 1)), (q(1, 4), q(1, 4)), (q(3, 8), q(1, 2)), (q(5, 8), q(1, 2)), (q(3, 4), q(3, 4)), (q(1, 1), q(1, 1))])
            .unwrap()
    }

    fn two_cycle() -> (PwaMap, ShrinkingCertificate) {
        let f = PwaMap::from_nodes(vec![(q(0, 1), q(3, 4)), (q(3, 8), q(3, 4)), (q(5, 8), q(1, 4)), (q(1, 1), q(1, 4))]).unwrap();
        let cert = verify_periodic_shrinking(&f, &Interval::open(q(1, 8), q(3, 8)), 2).accepted().unwrap();
        (f, cert)
    }

    #[test]
    fn identity_basin_hits_own_point() {
        let id = PwaMap::identity();
        let mu = AtomicMeasure::dirac(grid_point(3, 10)).unwrap();
        let b = basin_estimate(&id, &mu, &q(1, 100), 10, 5, 8).unwrap();
        assert!(b.hit_fraction >= q(1, 10));
        assert!(basin_estimate(&id, &mu, &q(1, 100), 1, 5, 8).is_err());
    }

    #[test]
    fn plateau_attracts_basin() {
        let f = plateau_map();
        let mu = AtomicMeasure::dirac(q(1, 2)).unwrap();
        let b = basin_estimate(&f, &mu, &q(1, 8), 16, 64, 12).unwrap();
        assert!(b.hit_fraction.is_positive());
        let far = AtomicMeasure::dirac(q(1, 16)).unwrap();
        let f2 = PwaMap::constant(q(1, 2)).unwrap();
        assert_eq!(basin_estimate(&f2, &far, &q(1, 16), 16, 64, 12).unwrap().hits, 0);
    }

    #[test]
    fn shrinked_plateau_measure() {
        let f = plateau_map();
        let cert = verify_periodic_shrinking(&f, &Interval::open(q(3, 8), q(5, 8)), 1).accepted().unwrap();
        let nu = AtomicMeasure::dirac(q(1, 2)).unwrap();
        assert!(is_q_shrinked_periodic(&f, &nu, 3, &cert).unwrap());
        assert!(!is_q_shrinked_periodic(&f, &nu, 4, &cert).unwrap());
        let not_orbit = AtomicMeasure::uniform_on(&[q(1, 2), q(1, 3)]).unwrap();
        assert!(is_q_shrinked_periodic(&f, &not_orbit, 3, &cert).is_err());
    }

    #[test]
    fn shrinked_two_cycle() {
        let (f, cert) = two_cycle();
        let nu = orbit_measure(&f, &cert).unwrap();
        assert!(is_q_shrinked_periodic(&f, &nu, 3, &cert).unwrap());
        assert!(!is_q_shrinked_periodic(&f, &nu, 5, &cert).unwrap());
    }

    #[test]
    fn separation_fixed_plateau() {
        let f = plateau_map();
        let cert = verify_periodic_shrinking(&f, &Interval::open(q(3, 8), q(5, 8)), 1).accepted().unwrap();
        let mu2 = AtomicMeasure::dirac(q(1, 8)).unwrap();
        let r = separation_functional(&f, &cert, &mu2, &q(1, 2)).unwrap();
        assert_eq!((r.integral_mu1.clone(), r.integral_mu2.clone(), r.integral_combo.clone()), (q(1, 1), q(0, 1), q(1, 2)));
        assert!(r.sandwich_holds());
        assert!(separation_functional(&f, &cert, &mu2, &q(0, 1)).is_err());
        assert!(separation_functional(&f, &cert, &mu2, &q(1, 1)).is_err());
        let bad = AtomicMeasure::dirac(q(1, 2)).unwrap();
        assert!(matches!(separation_functional(&f, &cert, &bad, &q(1, 2)), Err(LabError::Precondition(_))));
    }

    #[test]
    fn separation_two_cycle() {
        let (f, cert) = two_cycle();
        let mu2 = AtomicMeasure::dirac(q(1, 2)).unwrap();
        let r = separation_functional(&f, &cert, &mu2, &q(1, 3)).unwrap();
        assert_eq!(r.integral_mu1, q(1, 2));
        assert_eq!(r.integral_combo, q(1, 6));
        assert_eq!(r.psi.eval(&q(1, 4)).unwrap(), q(1, 1));
        assert_eq!(r.psi.eval(&q(3, 16)).unwrap(), q(1, 2));
        assert_eq!(r.psi.eval(&q(1, 2)).unwrap(), q(0, 1));
    }

    proptest! {
        #[test]
        fn basin_monotone_in_epsilon(a in 1i64..64, b in 1i64..64, c in 0i64..=16) {
            let f = plateau_map();
            let mu = AtomicMeasure::dirac(q(c, 16)).unwrap();
            let (e1, e2) = if a <= b { (q(a, 64), q(b, 64)) } else { (q(b, 64), q(a, 64)) };
            let h1 = basin_estimate(&f, &mu, &e1, 12, 16, 8).unwrap().hit_fraction;
            let h2 = basin_estimate(&f, &mu, &e2, 12, 16, 8).unwrap().hit_fraction;
            prop_assert!(h1 <= h2);
        }

        #[test]
        fn shrinked_antitone_in_q(qq in 1u64..12, smaller in 1u64..12) {
            let (f, cert) = two_cycle();
            let nu = orbit_measure(&f, &cert).unwrap();
            if is_q_shrinked_periodic(&f, &nu, qq, &cert).unwrap() && smaller <= qq {
                prop_assert!(is_q_shrinked_periodic(&f, &nu, smaller, &cert).unwrap());
            }
        }

        #[test]
        fn sandwich_for_any_lambda(num in 1i64..100) {
            let (f, cert) = two_cycle();
            let mu2 = AtomicMeasure::dirac(q(1, 2)).unwrap();
            let r = separation_functional(&f, &cert, &mu2, &q(num, 100)).unwrap();
            prop_assert!(r.sandwich_holds());
            prop_assert_eq!(r.integral_combo, q(num, 200));
        }
    }
}
