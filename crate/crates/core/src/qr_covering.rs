//! Good q,r-coverings and the plateau construction that perturbs a map into
//! one admitting such a covering.
//!
//! A good covering is a finite family of open intervals `U_i` covering
//! `{f^r = x}`, each shorter than `1/q` and each containing the closure of a
//! periodic shrinking interval whose period divides `r`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::pwa::{FixedComponent, FixedKind, PwaMap};
use crate::rational::Rational;
use crate::shrinking::{recheck, verify_periodic_shrinking, ShrinkingCertificate};
use crate::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverEntry {
    pub interval: Interval,
    /// Index `i` of the grid interval `(i/2q', (i+2)/2q')` it grew from.
    pub grid_index: usize,
    pub representative: Rational,
    pub cert: ShrinkingCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QRCovering {
    pub q: u64,
    pub r: usize,
    pub entries: Vec<CoverEntry>,
}

impl QRCovering {
    pub fn intervals(&self) -> Vec<Interval> {
        self.entries.iter().map(|e| e.interval.clone()).collect()
    }
}

/// `piece \ cut`, as at most two intervals.
fn subtract(piece: &Interval, cut: &Interval) -> Vec<Interval> {
    if piece.is_empty() || cut.is_empty() || !piece.intersects(cut) {
        return if piece.is_empty() { Vec::new() } else { vec![piece.clone()] };
    }
    let mut out = Vec::new();
    let left = Interval { lo: piece.lo.clone(), hi: cut.lo.clone(), closed_lo: piece.closed_lo, closed_hi: !cut.closed_lo };
    if !left.is_empty() && left.hi <= piece.hi {
        out.push(left);
    }
    let right = Interval { lo: cut.hi.clone(), hi: piece.hi.clone(), closed_lo: !cut.closed_hi, closed_hi: piece.closed_hi };
    if !right.is_empty() && right.lo >= piece.lo {
        out.push(right);
    }
    out
}

fn subtract_all(pieces: Vec<Interval>, cuts: &[Interval]) -> Vec<Interval> {
    cuts.iter().fold(pieces, |acc, c| acc.iter().flat_map(|p| subtract(p, c)).collect())
}

/// Parts of `{f^r = x}` outside the union of `cover`, sorted.
pub fn uncovered_fixed_set(fixed: &[FixedComponent], cover: &[Interval]) -> Vec<Interval> {
    let mut out = subtract_all(fixed.iter().map(|c| c.interval.clone()).collect(), cover);
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Exact check of the three covering conditions; a refusal names the first
/// violation (an uncovered point, an overlong interval or a bad certificate).
pub fn verify_qr_covering(map: &PwaMap, cov: &QRCovering, piece_cap: usize) -> Result<Verdict<()>> {
    if cov.q == 0 || cov.r == 0 {
        return Err(LabError::Domain("q and r must be positive".into()));
    }
    let fixed = map.fixed_points_of_iterate(cov.r, piece_cap)?;
    let cover = cov.intervals();
    if let Some(gap) = uncovered_fixed_set(&fixed, &cover).first() {
        return Ok(Verdict::Refused(format!("uncovered point {} of the fixed set of f^{}", gap.lo, cov.r)));
    }
    let bound = Rational::new(1, cov.q as i64);
    for e in &cov.entries {
        if !e.interval.is_relatively_open() || e.interval.lo >= e.interval.hi {
            return Ok(Verdict::Refused(format!("{} is not an open interval", e.interval)));
        }
        if e.interval.length() >= bound {
            return Ok(Verdict::Refused(format!("length of {} is not below 1/{}", e.interval, cov.q)));
        }
        if !recheck(map, &e.cert).is_accepted() || !e.cert.is_periodic() {
            return Ok(Verdict::Refused(format!("shrinking certificate in {} does not verify", e.interval)));
        }
        if !cov.r.is_multiple_of(e.cert.period) {
            return Ok(Verdict::Refused(format!("period {} does not divide {}", e.cert.period, cov.r)));
        }
        if !e.cert.interval.closure().is_subset_of(&e.interval) {
            return Ok(Verdict::Refused(format!("closure of {} is not inside {}", e.cert.interval, e.interval)));
        }
    }
    Ok(Verdict::Accepted(()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QRConstruction {
    pub map: PwaMap,
    pub cover: QRCovering,
    pub q_prime: u64,
    /// Plateaus planted; each consumes one grid interval.
    pub steps: usize,
    pub enlargements: usize,
    pub sup_distance: Rational,
}

/// Smallest `q'` with `1/q' < 1/q`, `1/q' < ε/2` and `L/q' < ε/2`.
pub fn grid_parameter(f: &PwaMap, q: u64, epsilon: &Rational) -> u64 {
    let half = epsilon / Rational::integer(2);
    let lip = Rational::max_of(&f.max_abs_slope(), &Rational::one());
    let a = (half / lip).smallest_recip_below();
    a.max(q + 1)
}

/// Grid interval `(i/2q', (i+2)/2q')`, closed where it touches 0 or 1.
pub fn grid_interval(i: usize, q_prime: u64) -> Interval {
    let d = 2 * q_prime as i64;
    let lo = Rational::new(i as i64, d);
    let hi = Rational::new(i as i64 + 2, d);
    Interval { closed_lo: lo.is_zero(), closed_hi: hi == Rational::one(), lo, hi }
}

fn grid_index_for(y: &Rational, q_prime: u64) -> usize {
    let k = (y * Rational::integer(2 * q_prime as i64)).floor();
    let k: i64 = k.try_into().expect("grid index fits");
    (k - 1).clamp(0, 2 * q_prime as i64 - 2) as usize
}

fn orbit(map: &PwaMap, x: &Rational, r: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(r);
    let mut y = x.clone();
    for _ in 0..r {
        let next = map.eval_in_domain(&y);
        out.push(y);
        y = next;
    }
    out
}

/// Leftmost fixed point of `g^r` inside the open piece `v`.
fn first_fixed_in(fixed: &[FixedComponent], v: &Interval) -> Option<Rational> {
    for c in fixed {
        let meet = c.interval.intersect(v);
        if meet.is_empty() {
            continue;
        }
        return Some(match c.kind {
            FixedKind::Point => c.interval.lo.clone(),
            FixedKind::Segment => meet.midpoint(),
        });
    }
    None
}

/// Ramp-plateau-ramp on `v`: `g = f(x)` on `[x−h, x+h] ∩ v̄`, `g` unchanged
/// at the ends of `v` and at every protected point, affine in between.
fn plant_plateau(g: &PwaMap, v: &Interval, x: &Rational, protected: &[Rational]) -> Result<(PwaMap, Interval)> {
    let mut room = Vec::new();
    if !(v.closed_lo && *x == v.lo) {
        room.push(x - &v.lo);
    }
    if !(v.closed_hi && *x == v.hi) {
        room.push(&v.hi - x);
    }
    room.extend(protected.iter().filter(|p| *p != x).map(|p| (p - x).abs()));
    let h = room.iter().min().cloned().unwrap_or_else(Rational::one) / Rational::integer(4);
    if !h.is_positive() {
        return Err(LabError::Internal(format!("no room for a plateau at {x}")));
    }
    let plateau = Interval {
        lo: Rational::max_of(&(x - &h), &Rational::zero()),
        hi: Rational::min_of(&(x + &h), &Rational::one()),
        closed_lo: (x - &h).is_negative() || (x - &h).is_zero(),
        closed_hi: x + &h >= Rational::one(),
    };
    let level = g.eval_in_domain(x);
    let vbar = v.closure();
    let mut nodes: Vec<(Rational, Rational)> = g
        .nodes()
        .filter(|(t, _)| **t <= vbar.lo || **t >= vbar.hi)
        .map(|(t, y)| (t.clone(), y.clone()))
        .collect();
    nodes.push((vbar.lo.clone(), g.eval_in_domain(&vbar.lo)));
    nodes.push((vbar.hi.clone(), g.eval_in_domain(&vbar.hi)));
    nodes.push((plateau.lo.clone(), level.clone()));
    nodes.push((plateau.hi.clone(), level));
    for p in protected {
        if vbar.interior().contains(p) && !plateau.closure().contains(p) {
            nodes.push((p.clone(), g.eval_in_domain(p)));
        }
    }
    Ok((PwaMap::from_nodes(nodes)?, plateau))
}

/// Plant plateaus one grid interval at a time until the fixed set of `g^r`
/// is covered, enlarging an earlier interval slightly whenever the leftmost
/// uncovered point sits on its boundary.
pub fn construct_qr_covered(f: &PwaMap, q: u64, r: usize, epsilon: &Rational, piece_cap: usize) -> Result<QRConstruction> {
    if q == 0 || r == 0 {
        return Err(LabError::Domain("q and r must be positive".into()));
    }
    if !epsilon.is_positive() {
        return Err(LabError::Domain("epsilon must be positive".into()));
    }
    let q_prime = grid_parameter(f, q, epsilon);
    let family = 2 * q_prime as usize - 1;
    let bound = Rational::new(1, q as i64);
    let mut g = f.clone();
    let mut cover: Vec<Interval> = Vec::new();
    let mut plateaus: Vec<(usize, Rational, Interval)> = Vec::new();
    let mut protected: Vec<Rational> = Vec::new();
    let mut enlargements = 0;
    for _ in 0..4 * family + 64 {
        let fixed = g.fixed_points_of_iterate(r, piece_cap)?;
        let uncovered = uncovered_fixed_set(&fixed, &cover);
        let Some(first) = uncovered.first() else {
            let entries = plateaus
                .iter()
                .zip(&cover)
                .map(|((idx, x, plateau), u)| {
                    let p = (1..=r).find(|&p| g.eval_iter(x, p).ok().as_ref() == Some(x)).expect("x is fixed by g^r");
                    let cert = verify_periodic_shrinking(&g, plateau, p)
                        .expect_accepted("plateau certificate")?;
                    Ok(CoverEntry { interval: u.clone(), grid_index: *idx, representative: x.clone(), cert })
                })
                .collect::<Result<Vec<_>>>()?;
            let sup_distance = g.sup_distance(f);
            return Ok(QRConstruction {
                map: g,
                cover: QRCovering { q, r, entries },
                q_prime,
                steps: plateaus.len(),
                enlargements,
                sup_distance,
            });
        };
        let y = first.lo.clone();
        let idx = grid_index_for(&y, q_prime);
        let j = grid_interval(idx, q_prime);
        let closures: Vec<Interval> = cover.iter().map(Interval::closure).collect();
        let pieces = subtract_all(vec![j.clone()], &closures);
        let pick = pieces.iter().find_map(|v| first_fixed_in(&fixed, v).map(|x| (v.clone(), x)));
        match pick {
            Some((v, x)) => {
                if plateaus.len() >= family || plateaus.iter().any(|(i, _, _)| *i == idx) {
                    return Err(LabError::Internal(format!("grid interval {idx} requested twice")));
                }
                let mut guard = protected.clone();
                guard.extend(orbit(&g, &x, r));
                let (next, plateau) = plant_plateau(&g, &v, &x, &guard)?;
                g = next;
                protected = guard;
                plateaus.push((idx, x, plateau));
                cover.push(j);
            }
            None => {
                let k = cover
                    .iter()
                    .position(|u| (u.hi == y && !u.closed_hi) || (u.lo == y && !u.closed_lo))
                    .ok_or_else(|| LabError::Internal(format!("uncovered point {y} is on no boundary")))?;
                let others: Vec<&Interval> = uncovered.iter().skip(1).collect();
                let mut eta = (&bound - cover[k].length()) / Rational::integer(4);
                for o in others {
                    eta = Rational::min_of(&eta, &(o.gap_to(&Interval::point(y.clone())) / Rational::integer(2)));
                }
                let u = &mut cover[k];
                if u.hi == y {
                    u.hi = Rational::min_of(&(&y + &eta), &Rational::one());
                    u.closed_hi = u.hi == Rational::one();
                } else {
                    u.lo = Rational::max_of(&(&y - &eta), &Rational::zero());
                    u.closed_lo = u.lo.is_zero();
                }
                enlargements += 1;
            }
        }
    }
    Err(LabError::Internal("covering construction did not terminate".into()))
}
