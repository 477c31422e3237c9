//! Periodic pseudo-orbits, exact shadowing by periodic orbits, and the
//! passage from a recurrent orbit segment to a nearby periodic measure.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::measures::{birkhoff_empirical, weakstar_distance, AtomicMeasure, TestFunction, WeakStarDistance};
use crate::pwa::{AffinePiece, FixedKind, PwaMap};
use crate::rational::Rational;
use crate::Verdict;

/// Tube fragments beyond this count switch the search to enumerating the
/// fixed points of `f^p`.
pub const DEFAULT_TUBE_CAP: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoOrbit {
    pub points: Vec<Rational>,
    pub delta: Rational,
    pub periodic: bool,
}

impl PseudoOrbit {
    pub fn periodic(points: Vec<Rational>, delta: Rational) -> Self {
        PseudoOrbit { points, delta, periodic: true }
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }
}

/// Every consecutive gap `|f(y_n) − y_{n+1}|`, including the wrap when periodic.
pub fn pseudo_orbit_gaps(map: &PwaMap, po: &PseudoOrbit) -> Result<Vec<Rational>> {
    let pts = &po.points;
    let mut gaps = Vec::with_capacity(pts.len());
    for (k, y) in pts.iter().enumerate() {
        let next = match pts.get(k + 1) {
            Some(z) => z,
            None if po.periodic => &pts[0],
            None => break,
        };
        gaps.push((map.eval(y)? - next).abs());
    }
    Ok(gaps)
}

pub fn verify_pseudo_orbit(map: &PwaMap, po: &PseudoOrbit) -> bool {
    if po.points.is_empty() || !po.delta.is_positive() {
        return false;
    }
    match pseudo_orbit_gaps(map, po) {
        Ok(gaps) => gaps.iter().all(|g| *g < po.delta),
        Err(_) => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shadow {
    pub point: Rational,
    pub orbit: Vec<Rational>,
    /// `max_n |f^n(z) − y_n|`.
    pub distance: Rational,
    pub used_fallback: bool,
}

fn window(y: &Rational, eps: &Rational) -> Interval {
    let lo = y - eps;
    let hi = y + eps;
    let (lo, closed_lo) = if lo.is_negative() { (Rational::zero(), true) } else { (lo, false) };
    let (hi, closed_hi) = if hi > Rational::one() { (Rational::one(), true) } else { (hi, false) };
    Interval { lo, hi, closed_lo, closed_hi }
}

/// `{x ∈ dom : a x + b ∈ w}`.
fn affine_preimage(p: &AffinePiece, w: &Interval) -> Interval {
    let empty = Interval { lo: Rational::one(), hi: Rational::zero(), closed_lo: true, closed_hi: true };
    if p.slope.is_zero() {
        return if w.contains(&p.intercept) { p.dom.clone() } else { empty };
    }
    let u = (&w.lo - &p.intercept) / &p.slope;
    let v = (&w.hi - &p.intercept) / &p.slope;
    let pre = if p.slope.is_positive() {
        Interval { lo: u, hi: v, closed_lo: w.closed_lo, closed_hi: w.closed_hi }
    } else {
        Interval { lo: v, hi: u, closed_lo: w.closed_hi, closed_hi: w.closed_lo }
    };
    pre.intersect(&p.dom)
}

/// Exact orbit check of a candidate against every window.
fn orbit_within(map: &PwaMap, z: &Rational, ys: &[Rational], eps: &Rational) -> Option<(Vec<Rational>, Rational)> {
    let mut orbit = Vec::with_capacity(ys.len());
    let mut x = z.clone();
    let mut worst = Rational::zero();
    for y in ys {
        let d = (&x - y).abs();
        if d >= *eps {
            return None;
        }
        if d > worst {
            worst = d;
        }
        let next = map.eval_in_domain(&x);
        orbit.push(x);
        x = next;
    }
    (x == *z).then_some((orbit, worst))
}

/// Candidate periodic points from the pieces of `f^p` on the tube: isolated
/// solutions, and the midpoint of any segment of fixed points.
fn candidates(pieces: &[AffinePiece]) -> Vec<Rational> {
    let mut out: Vec<Rational> = pieces
        .iter()
        .filter_map(|p| p.fixed_set())
        .map(|c| match c.kind {
            FixedKind::Point => c.interval.lo.clone(),
            FixedKind::Segment => c.interval.midpoint(),
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// A point `z` with `f^p(z) = z` and `|f^n(z) − y_n| < ε` for `n < p`.
pub fn shadow_periodic(map: &PwaMap, po: &PseudoOrbit, epsilon: &Rational, tube_cap: usize, piece_cap: usize) -> Result<Verdict<Shadow>> {
    if !po.periodic || po.points.is_empty() {
        return Err(LabError::Precondition("shadowing needs a nonempty periodic pseudo-orbit".into()));
    }
    if !epsilon.is_positive() {
        return Err(LabError::Domain("epsilon must be positive".into()));
    }
    if !verify_pseudo_orbit(map, po) {
        return Err(LabError::Precondition(format!("not a {}-pseudo-orbit", po.delta)));
    }
    let ys = &po.points;
    let p = ys.len();
    let start = window(&ys[0], epsilon);
    let mut tube = vec![AffinePiece { dom: start, slope: Rational::one(), intercept: Rational::zero() }];
    let mut overflow = false;
    for (step, y) in ys.iter().enumerate().skip(1) {
        let w = window(y, epsilon);
        let mut next = Vec::new();
        for piece in &tube {
            for q in map.post_compose_piece(piece) {
                let dom = affine_preimage(&q, &w);
                if !dom.is_empty() {
                    next.push(AffinePiece { dom, ..q });
                }
            }
        }
        if next.len() > tube_cap {
            overflow = true;
            break;
        }
        tube = next;
        if tube.is_empty() {
            return Ok(Verdict::Refused(format!("the tube around the pseudo-orbit is empty at step {step}")));
        }
    }
    let cands = if overflow {
        map.fixed_points_of_iterate(p, piece_cap)?
            .into_iter()
            .map(|c| match c.kind {
                FixedKind::Point => c.interval.lo,
                FixedKind::Segment => c.interval.midpoint(),
            })
            .collect()
    } else {
        let closing: Vec<AffinePiece> = tube.iter().flat_map(|t| map.post_compose_piece(t)).collect();
        candidates(&closing)
    };
    for z in cands {
        if let Some((orbit, distance)) = orbit_within(map, &z, ys, epsilon) {
            return Ok(Verdict::Accepted(Shadow { point: z, orbit, distance, used_fallback: overflow }));
        }
    }
    Ok(Verdict::Refused("no periodic point of the required period inside the tube".into()))
}

/// `Σ_{i ≤ N} 2^{-i} Lip(ψ_i)`: moving every atom by less than `ε` moves
/// the truncated distance by less than `ε` times this constant.
pub fn lipschitz_weight(n_terms: usize) -> Rational {
    TestFunction::first(n_terms)
        .iter()
        .enumerate()
        .map(|(i, psi)| psi.lipschitz() * Rational::pow2_neg(i as u32 + 1))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicApproximation {
    pub seed: Rational,
    pub period: usize,
    pub epsilon0: Rational,
    pub epsilon: Rational,
    pub delta: Rational,
    pub recurrence_gap: Rational,
    pub shadow: Shadow,
    pub measure: AtomicMeasure,
    pub distance: WeakStarDistance,
    /// `2ε₀ + 2^{-N}`.
    pub bound: Rational,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n0: usize,
    pub epsilon0: Rational,
    pub n_terms: usize,
    pub horizon: usize,
    pub tube_cap: usize,
    pub piece_cap: usize,
}

impl PipelineConfig {
    pub fn new(n0: usize, epsilon0: Rational, n_terms: usize) -> Self {
        PipelineConfig { n0, epsilon0, n_terms, horizon: 4096, tube_cap: DEFAULT_TUBE_CAP, piece_cap: crate::DEFAULT_PIECE_CAP }
    }
}

/// Find the first `p ≥ n0` with `|f^p(x) − x| < δ`, close the orbit segment
/// into a periodic `δ`-pseudo-orbit, shadow it within `ε`, and compare the
/// shadow's orbit measure with the empirical measure of the segment.
///
/// `ε = ε₀ / Σ 2^{-i} Lip(ψ_i)` and `δ = ε/2`.
pub fn ergodic_to_periodic(map: &PwaMap, x: &Rational, cfg: &PipelineConfig) -> Result<Verdict<PeriodicApproximation>> {
    if cfg.n0 == 0 || cfg.n_terms == 0 {
        return Err(LabError::Domain("n0 and N must be at least 1".into()));
    }
    if !cfg.epsilon0.is_positive() {
        return Err(LabError::Domain("epsilon0 must be positive".into()));
    }
    map.eval(x)?;
    let epsilon = &cfg.epsilon0 / lipschitz_weight(cfg.n_terms);
    let delta = &epsilon / Rational::integer(2);
    let mut orbit = vec![x.clone()];
    let mut y = x.clone();
    let mut found = None;
    for p in 1..=cfg.horizon {
        y = map.eval_in_domain(&y);
        if p >= cfg.n0 {
            let gap = (&y - x).abs();
            if gap < delta {
                found = Some((p, gap));
                break;
            }
        }
        orbit.push(y.clone());
    }
    let Some((period, recurrence_gap)) = found else {
        return Ok(Verdict::Refused(format!("no return within {delta} of the seed before step {}", cfg.horizon)));
    };
    orbit.truncate(period);
    let po = PseudoOrbit::periodic(orbit, delta.clone());
    let shadow = match shadow_periodic(map, &po, &epsilon, cfg.tube_cap, cfg.piece_cap)? {
        Verdict::Accepted(s) => s,
        Verdict::Refused(why) => return Ok(Verdict::Refused(why)),
    };
    let measure = AtomicMeasure::uniform_on(&shadow.orbit)?;
    let empirical = birkhoff_empirical(map, x, period)?;
    let distance = weakstar_distance(&measure, &empirical, cfg.n_terms)?;
    let bound = &cfg.epsilon0 * Rational::integer(2) + Rational::pow2_neg(cfg.n_terms as u32);
    let within_bound = distance.truncated_value < bound;
    Ok(Verdict::Accepted(PeriodicApproximation {
        seed: x.clone(),
        period,
        epsilon0: cfg.epsilon0.clone(),
        epsilon,
        delta,
        recurrence_gap,
        shadow,
        measure,
        distance,
        bound,
        within_bound,
    }))
}
