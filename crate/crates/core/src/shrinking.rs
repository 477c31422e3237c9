//! Periodic and eventually periodic shrinking intervals: verification,
//! the plateau perturbations that create them, and orbit measures on them.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::measures::AtomicMeasure;
use crate::pwa::{FixedKind, PwaMap, DEFAULT_PIECE_CAP};
use crate::rational::Rational;
use crate::Verdict;

/// Exact evidence that `interval` is a periodic (`preperiod == 0`) or
/// eventually periodic shrinking interval.
///
/// For the eventually periodic case `periodic_interval` is the periodic
/// shrinking interval the orbit falls into and `pre_images[j] = f^j(J̄)` for
/// `0 <= j <= preperiod`. `images[j] = f^j(Ī)` for the periodic interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShrinkingCertificate {
    pub interval: Interval,
    pub period: usize,
    pub periodic_interval: Interval,
    pub images: Vec<Interval>,
    pub return_image: Interval,
    pub preperiod: usize,
    pub pre_images: Vec<Interval>,
}

impl ShrinkingCertificate {
    pub fn is_periodic(&self) -> bool {
        self.preperiod == 0
    }

    /// `K = ∪_{j<p} f^j(Ī)` as its closed pieces.
    pub fn orbit_pieces(&self) -> &[Interval] {
        &self.images
    }
}

/// Forward images `f^j(Ī)` for `0 <= j <= steps`.
fn image_chain(map: &PwaMap, iv: &Interval, steps: usize) -> Result<Vec<Interval>> {
    let mut out = vec![iv.closure()];
    for _ in 0..steps {
        let next = map.image_of_interval(out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

pub fn verify_periodic_shrinking(map: &PwaMap, iv: &Interval, p: usize) -> Verdict<ShrinkingCertificate> {
    if p == 0 {
        return Verdict::Refused("period must be at least 1".into());
    }
    if iv.is_empty() || !iv.is_relatively_open() || iv.lo == iv.hi {
        return Verdict::Refused(format!("interval {iv} is not a nonempty open interval"));
    }
    let mut chain = match image_chain(map, iv, p) {
        Ok(c) => c,
        Err(e) => return Verdict::Refused(e.to_string()),
    };
    for a in 0..p {
        for b in a + 1..p {
            if chain[a].intersects(&chain[b]) {
                return Verdict::Refused(format!(
                    "disjointness: f^{a}(Ī) = {} meets f^{b}(Ī) = {}",
                    chain[a], chain[b]
                ));
            }
        }
    }
    if !chain[p].is_subset_of(iv) {
        return Verdict::Refused(format!("containment: f^{p}(Ī) = {} not inside {iv}", chain[p]));
    }
    let len = iv.length();
    for (j, img) in chain.iter().enumerate().take(p).skip(1) {
        if img.length() >= len {
            return Verdict::Refused(format!("length: f^{j}(I) has length {} >= {len}", img.length()));
        }
    }
    let return_image = chain.pop().unwrap();
    Verdict::Accepted(ShrinkingCertificate {
        interval: iv.clone(),
        period: p,
        periodic_interval: iv.clone(),
        images: chain,
        return_image,
        preperiod: 0,
        pre_images: Vec::new(),
    })
}

/// `J` falls into the periodic shrinking interval `target` after `n` steps.
pub fn verify_eventually_periodic(
    map: &PwaMap,
    j: &Interval,
    n: usize,
    target: &Interval,
    p: usize,
) -> Verdict<ShrinkingCertificate> {
    let periodic = match verify_periodic_shrinking(map, target, p) {
        Verdict::Accepted(c) => c,
        Verdict::Refused(r) => return Verdict::Refused(format!("target: {r}")),
    };
    if n == 0 {
        return Verdict::Refused("preperiod must be at least 1".into());
    }
    if j.is_empty() || !j.is_relatively_open() || j.lo == j.hi {
        return Verdict::Refused(format!("interval {j} is not a nonempty open interval"));
    }
    let chain = match image_chain(map, j, n) {
        Ok(c) => c,
        Err(e) => return Verdict::Refused(e.to_string()),
    };
    if !chain[n].is_subset_of(target) {
        return Verdict::Refused(format!("containment: f^{n}(J) = {} not inside {target}", chain[n]));
    }
    let len = j.length();
    if target.length() >= len {
        return Verdict::Refused(format!("length: target length {} >= {len}", target.length()));
    }
    for (s, img) in chain.iter().enumerate().take(n).skip(1) {
        if img.length() >= len {
            return Verdict::Refused(format!("length: f^{s}(J) has length {} >= {len}", img.length()));
        }
    }
    Verdict::Accepted(ShrinkingCertificate { interval: j.clone(), preperiod: n, pre_images: chain, ..periodic })
}

/// Recheck a stored certificate from scratch against `map`.
pub fn recheck(map: &PwaMap, cert: &ShrinkingCertificate) -> Verdict<ShrinkingCertificate> {
    let fresh = if cert.preperiod == 0 {
        verify_periodic_shrinking(map, &cert.interval, cert.period)
    } else {
        verify_eventually_periodic(map, &cert.interval, cert.preperiod, &cert.periodic_interval, cert.period)
    };
    match fresh {
        Verdict::Accepted(c) if c == *cert => Verdict::Accepted(c),
        Verdict::Accepted(_) => Verdict::Refused("stored images differ from recomputed images".into()),
        r => r,
    }
}

/// Lebesgue measure of a finite union of intervals.
pub fn union_length(intervals: &[Interval]) -> Rational {
    let mut ivs: Vec<&Interval> = intervals.iter().filter(|i| !i.is_empty()).collect();
    ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut total = Rational::zero();
    let mut cur: Option<(Rational, Rational)> = None;
    for iv in ivs {
        match &mut cur {
            Some((_, hi)) if iv.lo <= *hi => {
                if iv.hi > *hi {
                    *hi = iv.hi.clone();
                }
            }
            _ => {
                if let Some((lo, hi)) = cur.take() {
                    total += hi - lo;
                }
                cur = Some((iv.lo.clone(), iv.hi.clone()));
            }
        }
    }
    if let Some((lo, hi)) = cur {
        total += hi - lo;
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShrinkingCover {
    pub map: PwaMap,
    pub intervals: Vec<ShrinkingCertificate>,
    pub q: u64,
    pub k: u64,
    pub epsilon: Rational,
    pub cells: u64,
    pub sup_distance: Rational,
    pub deficiency: Rational,
}

/// Checks cover conditions: every interval shorter than `1/q`, every
/// certificate valid for `cover.map`, complement shorter than `1/k`.
pub fn verify_cover(cover: &ShrinkingCover) -> Verdict<Rational> {
    let bound = Rational::new(1, cover.q as i64);
    for (i, c) in cover.intervals.iter().enumerate() {
        if c.interval.length() >= bound {
            return Verdict::Refused(format!("interval {i} has length {} >= 1/{}", c.interval.length(), cover.q));
        }
        if let Verdict::Refused(r) = recheck(&cover.map, c) {
            return Verdict::Refused(format!("interval {i}: {r}"));
        }
    }
    let ivs: Vec<Interval> = cover.intervals.iter().map(|c| c.interval.clone()).collect();
    let deficiency = Rational::one() - union_length(&ivs);
    if deficiency >= Rational::new(1, cover.k as i64) {
        return Verdict::Refused(format!("deficiency {deficiency} >= 1/{}", cover.k));
    }
    Verdict::Accepted(deficiency)
}

/// Plateau perturbation: `g` is constant on the left part of each of `N`
/// equal cells, the constant being the midpoint of the leftmost cell inside
/// the `ε/2`-window around `f` of the cell's midpoint, and affine on the short
/// right gap of each cell.
pub fn perturb_to_shrinking_cover(f: &PwaMap, epsilon: &Rational, q: u64, k: u64) -> Result<ShrinkingCover> {
    if !epsilon.is_positive() || q == 0 || k == 0 {
        return Err(LabError::Domain("need epsilon > 0 and q, k >= 1".into()));
    }
    let four = Rational::integer(4);
    let lip = f.max_abs_slope();
    let mut delta = epsilon / &four;
    if lip > Rational::one() {
        delta = epsilon / (&four * &lip);
    }
    let n = std::cmp::max(q + 1, delta.smallest_recip_below());
    let nn = n as i64;
    let cell = |i: i64| Rational::new(i, nn);
    let mid = |i: i64| Rational::new(2 * i + 1, 2 * nn);
    let half_eps = epsilon / Rational::integer(2);

    // target cell index for each cell
    let mut target = Vec::with_capacity(n as usize);
    for i in 0..nn {
        let y = f.eval_in_domain(&mid(i));
        let (wlo, whi) = (&y - &half_eps, &y + &half_eps);
        let first: i64 = if wlo.is_negative() { 0 } else { (&wlo * Rational::integer(nn)).floor().try_into().unwrap_or(0) };
        let j = (first..nn)
            .find(|&j| cell(j) > wlo && cell(j + 1) < whi)
            .ok_or_else(|| LabError::Internal(format!("no cell fits the window around f(x_{i}) = {y}")))?;
        target.push(j as usize);
    }

    let gap = Rational::new(1, 4 * nn * k as i64);
    let mut nodes = Vec::with_capacity(2 * n as usize + 1);
    for i in 0..nn {
        let v = mid(target[i as usize] as i64);
        nodes.push((cell(i), v.clone()));
        let right = &cell(i + 1) - &gap;
        nodes.push((right, v.clone()));
        if i + 1 == nn {
            nodes.push((Rational::one(), v));
        }
    }
    let g = PwaMap::from_nodes(nodes)?;

    // cycle structure of i -> target[i]
    let period_of = |i: usize| -> Option<usize> {
        let mut c = target[i];
        for p in 1..=n as usize {
            if c == i {
                return Some(p);
            }
            c = target[c];
        }
        None
    };
    let mut certs = Vec::with_capacity(n as usize);
    for i in 0..n as usize {
        let iv = Interval::open(cell(i as i64), &cell(i as i64 + 1) - &gap);
        let cert = match period_of(i) {
            Some(p) => verify_periodic_shrinking(&g, &iv, p).expect_accepted("cycle plateau")?,
            None => {
                let mut c = i;
                let mut steps = 0;
                while period_of(c).is_none() {
                    c = target[c];
                    steps += 1;
                }
                let p = period_of(c).unwrap();
                let r = iv.length() / four.clone();
                let tgt = Interval::open(&mid(c as i64) - &r, &mid(c as i64) + &r);
                verify_eventually_periodic(&g, &iv, steps, &tgt, p).expect_accepted("transient plateau")?
            }
        };
        certs.push(cert);
    }
    let sup_distance = g.sup_distance(f);
    let mut cover = ShrinkingCover {
        map: g,
        intervals: certs,
        q,
        k,
        epsilon: epsilon.clone(),
        cells: n,
        sup_distance,
        deficiency: Rational::zero(),
    };
    cover.deficiency = verify_cover(&cover).expect_accepted("cover")?;
    Ok(cover)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedCluster {
    pub map: PwaMap,
    pub x0: Rational,
    pub delta: Rational,
    pub central_plateau: Interval,
    pub fixed_points: Vec<Rational>,
    pub plateaus: Vec<Interval>,
    pub sup_distance: Rational,
}

/// Plant a constant plateau at a fixed point `x0` of `f` and `q` further
/// small constant plateaus crossing the diagonal next to it.
pub fn perturb_to_fixed_cluster(f: &PwaMap, q: u64, epsilon: &Rational) -> Result<FixedCluster> {
    if q == 0 || !epsilon.is_positive() {
        return Err(LabError::Domain("need q >= 1 and epsilon > 0".into()));
    }
    let comps = f.fixed_points_of_iterate(1, DEFAULT_PIECE_CAP)?;
    let rep = |c: &crate::pwa::FixedComponent| match c.kind {
        FixedKind::Point => c.interval.lo.clone(),
        FixedKind::Segment => c.interval.midpoint(),
    };
    let x0 = comps
        .iter()
        .map(rep)
        .find(|x| x.is_positive() && *x < Rational::one())
        .unwrap_or_else(|| rep(&comps[0]));
    let one = Rational::one();
    let two = Rational::integer(2);
    let eight = Rational::integer(8);
    let mut delta = Rational::new(1, 2 * q as i64);
    for _ in 0..200 {
        let half = &delta / &two;
        let eighth = &delta / &eight;
        let right_room = &x0 + &half <= one;
        let left_room = !(&x0 - &half).is_negative();
        if (right_room || left_room) && (left_room || x0.is_zero()) && (right_room || x0 == one) {
            let sign = if right_room { Rational::one() } else { -Rational::one() };
            let s = &delta * Rational::new(3, 8 * (q as i64 + 1));
            let h = &s / Rational::integer(8);
            let mut nodes: Vec<(Rational, Rational)> = f
                .nodes()
                .filter(|(x, _)| **x < &x0 - &half || **x > &x0 + &half)
                .map(|(x, y)| (x.clone(), y.clone()))
                .collect();
            for end in [&x0 - &half, &x0 + &half] {
                if end.in_unit_interval() {
                    nodes.push((end.clone(), f.eval_in_domain(&end)));
                }
            }
            let c_lo = Rational::max_of(&(&x0 - &eighth), &Rational::zero());
            let c_hi = Rational::min_of(&(&x0 + &eighth), &one);
            nodes.push((c_lo.clone(), x0.clone()));
            nodes.push((c_hi.clone(), x0.clone()));
            let mut fixed = Vec::new();
            let mut plateaus = Vec::new();
            for i in 1..=q as i64 {
                let c = &x0 + &sign * (&eighth + Rational::integer(i) * &s);
                nodes.push((&c - &h, c.clone()));
                nodes.push((&c + &h, c.clone()));
                plateaus.push(Interval::open(&c - &h, &c + &h));
                fixed.push(c);
            }
            if sign.is_negative() {
                fixed.reverse();
                plateaus.reverse();
            }
            let g = PwaMap::from_nodes(nodes)?;
            let d = g.sup_distance(f);
            if d < *epsilon {
                return Ok(FixedCluster {
                    map: g,
                    x0: x0.clone(),
                    delta: delta.clone(),
                    central_plateau: Interval::open(c_lo, c_hi),
                    fixed_points: fixed,
                    plateaus,
                    sup_distance: d,
                });
            }
        }
        delta = &delta / &two;
    }
    Err(LabError::Internal("fixed cluster did not reach the requested distance".into()))
}

/// Checks that each reported cluster point is a fixed point of `map` with a
/// constant neighbourhood, and that plateaus are separated by at least half
/// the minimum distance between cluster points.
pub fn verify_fixed_cluster(cl: &FixedCluster) -> Verdict<()> {
    let g = &cl.map;
    let mut pts = vec![cl.x0.clone()];
    pts.extend(cl.fixed_points.iter().cloned());
    for (x, iv) in cl.fixed_points.iter().zip(&cl.plateaus) {
        if g.eval_in_domain(x) != *x {
            return Verdict::Refused(format!("{x} is not fixed"));
        }
        if !iv.contains(x) {
            return Verdict::Refused(format!("{x} not inside its plateau {iv}"));
        }
        let img = g.image_of_interval(&iv.closure()).expect("nonempty plateau");
        if img.lo != img.hi {
            return Verdict::Refused(format!("map not constant on {iv}"));
        }
        if (x - &cl.x0).abs() * Rational::integer(2) >= cl.delta {
            return Verdict::Refused(format!("{x} outside the δ-window around x0"));
        }
    }
    if cl.delta >= Rational::new(1, cl.fixed_points.len() as i64) {
        return Verdict::Refused("δ not below 1/q".into());
    }
    let cimg = g.image_of_interval(&cl.central_plateau.closure()).expect("nonempty plateau");
    if cimg != Interval::point(cl.x0.clone()) {
        return Verdict::Refused("map not constant at x0 on the central plateau".into());
    }
    let mut sorted = pts.clone();
    sorted.sort();
    let min_d = sorted.windows(2).map(|w| &w[1] - &w[0]).min().unwrap_or_else(Rational::one);
    let mut all = vec![cl.central_plateau.clone()];
    all.extend(cl.plateaus.iter().cloned());
    for a in 0..all.len() {
        for b in a + 1..all.len() {
            if all[a].gap_to(&all[b]) * Rational::integer(2) < min_d {
                return Verdict::Refused(format!("plateaus {} and {} closer than half the minimum gap", all[a], all[b]));
            }
        }
    }
    Verdict::Accepted(())
}

/// Uniform measure on a periodic orbit inside the certificate's periodic
/// interval (leftmost solution of `f^p(y) = y` on its closure).
pub fn orbit_measure(map: &PwaMap, cert: &ShrinkingCertificate) -> Result<AtomicMeasure> {
    let p = cert.period;
    let dom = cert.periodic_interval.closure();
    let pieces = map.iterate_pieces_on(&dom, p, DEFAULT_PIECE_CAP)?;
    let y = pieces
        .iter()
        .filter_map(|pc| pc.fixed_set())
        .map(|c| c.representative())
        .min()
        .ok_or_else(|| LabError::Internal(format!("no periodic point in {dom}")))?;
    let mut orbit = Vec::with_capacity(p);
    let mut z = y;
    for _ in 0..p {
        let next = map.eval_in_domain(&z);
        orbit.push(z);
        z = next;
    }
    AtomicMeasure::uniform_on(&orbit)
}

/// `ν(f^j(Ī))` for `0 <= j < p`.
pub fn orbit_masses(nu: &AtomicMeasure, cert: &ShrinkingCertificate) -> Vec<Rational> {
    cert.images.iter().map(|im| nu.mass_in(im)).collect()
}

/// First cover interval all of whose forward images are shorter than `α`.
pub fn non_expansivity_witness(alpha: &Rational, cover: &ShrinkingCover) -> Verdict<Interval> {
    if !alpha.is_positive() {
        return Verdict::Refused("alpha must be positive".into());
    }
    for c in &cover.intervals {
        let all = c.pre_images.iter().chain(c.images.iter()).chain(std::iter::once(&c.return_image));
        let short = c.interval.length() < *alpha && all.into_iter().all(|im| im.length() < *alpha);
        if short {
            return Verdict::Accepted(c.interval.clone());
        }
    }
    Verdict::Refused(format!("no cover interval shorter than {alpha}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn plateau_pair() -> (PwaMap, Interval, Interval) {
        // constant 3/4 near 1/4 and constant 1/4 near 3/4
        let g = PwaMap::from_nodes(vec![
            (q(0, 1), q(3, 4)),
            (q(3, 8), q(3, 4)),
            (q(5, 8), q(1, 4)),
            (q(1, 1), q(1, 4)),
        ])
        .unwrap();
        (g, Interval::open(q(1, 8), q(3, 8)), Interval::open(q(5, 8), q(7, 8)))
    }

    #[test]
    fn constant_piece_is_shrinking() {
        let g = PwaMap::constant(q(1, 2)).unwrap();
        let c = verify_periodic_shrinking(&g, &Interval::open(q(1, 4), q(3, 4)), 1).accepted().unwrap();
        assert_eq!(c.return_image, Interval::point(q(1, 2)));
    }

    #[test]
    fn identity_refused_on_containment() {
        let r = verify_periodic_shrinking(&PwaMap::identity(), &Interval::open(q(1, 4), q(1, 2)), 1);
        assert!(r.refusal().unwrap().starts_with("containment"));
    }

    #[test]
    fn closed_interval_refused() {
        let g = PwaMap::constant(q(1, 2)).unwrap();
        assert!(!verify_periodic_shrinking(&g, &Interval::closed(q(1, 4), q(3, 4)), 1).is_accepted());
    }

    #[test]
    fn two_cycle_orbit_measure() {
        let (g, a, b) = plateau_pair();
        let c = verify_periodic_shrinking(&g, &a, 2).accepted().unwrap();
        assert!(verify_periodic_shrinking(&g, &b, 2).is_accepted());
        let nu = orbit_measure(&g, &c).unwrap();
        assert_eq!(nu, AtomicMeasure::new(vec![(q(1, 4), q(1, 2)), (q(3, 4), q(1, 2))]).unwrap());
        assert_eq!(orbit_masses(&nu, &c), vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn cover_of_identity() {
        let id = PwaMap::identity();
        let cov = perturb_to_shrinking_cover(&id, &q(1, 10), 4, 4).unwrap();
        assert!(cov.intervals.len() >= 5);
        assert!(cov.deficiency < q(1, 4));
        assert!(cov.sup_distance < q(3, 10));
        for c in &cov.intervals {
            assert!(recheck(&cov.map, c).is_accepted());
        }
    }

    #[test]
    fn cover_midpoints_are_eventually_periodic() {
        let cov = perturb_to_shrinking_cover(&PwaMap::tent(), &q(1, 8), 3, 2).unwrap();
        let n = cov.cells as usize;
        for c in &cov.intervals {
            let mut seen = vec![c.interval.midpoint()];
            let mut y = c.interval.midpoint();
            let mut cyc = false;
            for _ in 0..=n + 1 {
                y = cov.map.eval_in_domain(&y);
                if seen.contains(&y) {
                    cyc = true;
                    break;
                }
                seen.push(y.clone());
            }
            assert!(cyc);
        }
    }

    #[test]
    fn cover_applied_twice_stays_close() {
        let eps = q(1, 12);
        let cov = perturb_to_shrinking_cover(&PwaMap::tent(), &eps, 3, 3).unwrap();
        let again = perturb_to_shrinking_cover(&cov.map, &eps, 3, 3).unwrap();
        assert!(again.sup_distance < &eps * Rational::integer(3));
    }

    #[test]
    fn fixed_cluster_on_tent() {
        let t = PwaMap::tent();
        let cl = perturb_to_fixed_cluster(&t, 3, &q(1, 10)).unwrap();
        assert_eq!(cl.x0, q(2, 3));
        assert!(cl.delta < q(1, 3));
        assert!(cl.sup_distance < q(1, 10));
        assert_eq!(cl.fixed_points.len(), 3);
        assert!(verify_fixed_cluster(&cl).is_accepted());
        let fps: Vec<Rational> =
            cl.map.fixed_points_of_iterate(1, DEFAULT_PIECE_CAP).unwrap().iter().map(|c| c.representative()).collect();
        for x in &cl.fixed_points {
            assert!(fps.contains(x));
            assert!((x - &cl.x0).abs() < &cl.delta / Rational::integer(2));
        }
        for iv in &cl.plateaus {
            assert!(verify_periodic_shrinking(&cl.map, iv, 1).is_accepted());
        }
    }

    #[test]
    fn fixed_cluster_at_boundary() {
        // fixed points only at 0
        let f = PwaMap::from_nodes(vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 2))]).unwrap();
        let cl = perturb_to_fixed_cluster(&f, 2, &q(1, 20)).unwrap();
        assert_eq!(cl.x0, q(0, 1));
        assert!(verify_fixed_cluster(&cl).is_accepted());
    }

    #[test]
    fn single_plateau_cluster_keeps_its_gap() {
        let cl = perturb_to_fixed_cluster(&PwaMap::tent(), 1, &q(1, 10)).unwrap();
        assert!(verify_fixed_cluster(&cl).is_accepted());
        let gap = cl.central_plateau.gap_to(&cl.plateaus[0]);
        assert!(gap * Rational::integer(2) >= (&cl.fixed_points[0] - &cl.x0).abs());
    }

    #[test]
    fn witness_and_refusal() {
        let cov = perturb_to_shrinking_cover(&PwaMap::identity(), &q(1, 10), 4, 4).unwrap();
        let w = non_expansivity_witness(&q(1, 4), &cov).accepted().unwrap();
        assert_eq!(w, cov.intervals[0].interval);
        assert!(!non_expansivity_witness(&q(1, 100_000), &cov).is_accepted());
    }

    #[test]
    fn union_length_merges() {
        let ivs = vec![Interval::open(q(0, 1), q(1, 2)), Interval::open(q(1, 4), q(3, 4)), Interval::closed(q(7, 8), q(1, 1))];
        assert_eq!(union_length(&ivs), q(7, 8));
    }
}
