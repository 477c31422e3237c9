//! Continuous piecewise-affine self-maps of `[0,1]` with rational nodes.

use std::convert::TryFrom;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::rational::Rational;

/// Default cap on the number of affine pieces an iterate may have.
pub const DEFAULT_PIECE_CAP: usize = 1 << 20;

/// A continuous map of `[0,1]` that is affine between consecutive
/// breakpoints. Values are shared at breakpoints, so continuity holds by
/// construction.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPwa", into = "RawPwa")]
pub struct PwaMap {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawPwa {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl TryFrom<RawPwa> for PwaMap {
    type Error = LabError;
    fn try_from(raw: RawPwa) -> Result<Self> {
        PwaMap::new(raw.breakpoints, raw.values)
    }
}

impl From<PwaMap> for RawPwa {
    fn from(m: PwaMap) -> Self {
        RawPwa { breakpoints: m.breakpoints, values: m.values }
    }
}

impl std::fmt::Debug for PwaMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PwaMap[")?;
        for (i, (x, y)) in self.nodes().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        f.write_str("]")
    }
}

/// The restriction of a map to `dom`, where it equals `slope * x + intercept`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub dom: Interval,
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffinePiece {
    pub fn eval(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    /// Solutions of `slope * x + intercept = x` inside the domain.
    pub fn fixed_set(&self) -> Option<FixedComponent> {
        if self.dom.is_empty() {
            return None;
        }
        if self.slope == Rational::one() {
            if self.intercept.is_zero() {
                let kind = if self.dom.lo == self.dom.hi { FixedKind::Point } else { FixedKind::Segment };
                return Some(FixedComponent { interval: self.dom.clone(), kind });
            }
            return None;
        }
        let x = &self.intercept / (Rational::one() - &self.slope);
        self.dom.contains(&x).then(|| FixedComponent::point(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedKind {
    Point,
    Segment,
}

/// One connected component of a fixed-point set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedComponent {
    pub interval: Interval,
    pub kind: FixedKind,
}

impl FixedComponent {
    pub fn point(x: Rational) -> Self {
        FixedComponent { interval: Interval::point(x), kind: FixedKind::Point }
    }

    /// A canonical representative: the point itself, or the left end of a segment.
    pub fn representative(&self) -> Rational {
        self.interval.lo.clone()
    }
}

impl PwaMap {
    /// Validating constructor.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(LabError::Domain(format!(
                "need at least two breakpoints and as many values (got {} and {})",
                breakpoints.len(),
                values.len()
            )));
        }
        if !breakpoints[0].is_zero() || *breakpoints.last().unwrap() != Rational::one() {
            return Err(LabError::Domain("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Domain("breakpoints must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.in_unit_interval()) {
            return Err(LabError::Domain(format!("value {v} outside [0,1]")));
        }
        Ok(PwaMap { breakpoints, values })
    }

    /// Build from `(x, y)` nodes. Repeated abscissae with equal values are
    /// merged; repeated abscissae with different values are rejected.
    pub fn from_nodes(mut nodes: Vec<(Rational, Rational)>) -> Result<Self> {
        nodes.sort_by(|a, b| a.0.cmp(&b.0));
        let mut xs: Vec<Rational> = Vec::with_capacity(nodes.len());
        let mut ys: Vec<Rational> = Vec::with_capacity(nodes.len());
        for (x, y) in nodes {
            if let Some(last) = xs.last() {
                if *last == x {
                    if *ys.last().unwrap() != y {
                        return Err(LabError::Domain(format!("conflicting values at node {x}")));
                    }
                    continue;
                }
            }
            xs.push(x);
            ys.push(y);
        }
        PwaMap::new(xs, ys)
    }

    pub fn identity() -> Self {
        PwaMap { breakpoints: vec![Rational::zero(), Rational::one()], values: vec![Rational::zero(), Rational::one()] }
    }

    pub fn constant(c: Rational) -> Result<Self> {
        PwaMap::new(vec![Rational::zero(), Rational::one()], vec![c.clone(), c])
    }

    /// The full tent `x ↦ 1 − |2x − 1|`.
    pub fn tent() -> Self {
        let h = Rational::new(1, 2);
        PwaMap {
            breakpoints: vec![Rational::zero(), h, Rational::one()],
            values: vec![Rational::zero(), Rational::one(), Rational::zero()],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.breakpoints.iter().zip(self.values.iter())
    }

    pub fn piece_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Index `k` of the piece `[x_k, x_{k+1}]` containing `x` (left-biased
    /// at interior breakpoints, which is harmless by continuity).
    fn piece_index(&self, x: &Rational) -> usize {
        let pos = self.breakpoints.partition_point(|b| b <= x);
        pos.saturating_sub(1).min(self.piece_count() - 1)
    }

    fn piece(&self, k: usize) -> AffinePiece {
        let (x0, x1) = (&self.breakpoints[k], &self.breakpoints[k + 1]);
        let (y0, y1) = (&self.values[k], &self.values[k + 1]);
        let slope = (y1 - y0) / (x1 - x0);
        let intercept = y0 - &slope * x0;
        AffinePiece { dom: Interval::closed(x0.clone(), x1.clone()), slope, intercept }
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if !x.in_unit_interval() {
            return Err(LabError::Domain(format!("evaluation point {x} outside [0,1]")));
        }
        Ok(self.eval_in_domain(x))
    }

    /// Evaluation for points already known to lie in `[0,1]`.
    pub fn eval_in_domain(&self, x: &Rational) -> Rational {
        let k = self.piece_index(x);
        let (x0, x1) = (&self.breakpoints[k], &self.breakpoints[k + 1]);
        let (y0, y1) = (&self.values[k], &self.values[k + 1]);
        if x == x0 {
            return y0.clone();
        }
        if x == x1 {
            return y1.clone();
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// `n`-fold orbit point `f^n(x)`.
    pub fn eval_iter(&self, x: &Rational, n: usize) -> Result<Rational> {
        let mut y = self.eval(x)?;
        for _ in 1..n {
            y = self.eval_in_domain(&y);
        }
        if n == 0 {
            return Ok(x.clone());
        }
        Ok(y)
    }

    pub fn max_abs_slope(&self) -> Rational {
        (0..self.piece_count())
            .map(|k| self.piece(k).slope.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Drop interior breakpoints where the two adjacent pieces are collinear.
    pub fn simplified(&self) -> PwaMap {
        let n = self.breakpoints.len();
        let mut xs = vec![self.breakpoints[0].clone()];
        let mut ys = vec![self.values[0].clone()];
        for k in 1..n - 1 {
            let (xp, yp) = (xs.last().unwrap(), ys.last().unwrap());
            let (x, y) = (&self.breakpoints[k], &self.values[k]);
            let (xn, yn) = (&self.breakpoints[k + 1], &self.values[k + 1]);
            // collinear iff (y - yp)(xn - x) == (yn - y)(x - xp)
            if (y - yp) * (xn - x) != (yn - y) * (x - xp) {
                xs.push(x.clone());
                ys.push(y.clone());
            }
        }
        xs.push(self.breakpoints[n - 1].clone());
        ys.push(self.values[n - 1].clone());
        PwaMap { breakpoints: xs, values: ys }
    }

    /// `self ∘ inner`, simplified.
    pub fn compose(&self, inner: &PwaMap, cap: usize) -> Result<PwaMap> {
        let mut xs: Vec<Rational> = vec![inner.breakpoints[0].clone()];
        for k in 0..inner.piece_count() {
            let (x0, x1) = (&inner.breakpoints[k], &inner.breakpoints[k + 1]);
            let (y0, y1) = (&inner.values[k], &inner.values[k + 1]);
            if y0 != y1 {
                let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
                let start = self.breakpoints.partition_point(|b| b <= lo);
                let end = self.breakpoints.partition_point(|b| b < hi);
                let inner_bps = &self.breakpoints[start..end];
                let to_x = |b: &Rational| x0 + (b - y0) * (x1 - x0) / (y1 - y0);
                if y0 < y1 {
                    xs.extend(inner_bps.iter().map(to_x));
                } else {
                    xs.extend(inner_bps.iter().rev().map(to_x));
                }
            }
            xs.push(x1.clone());
            if xs.len() > cap + 1 {
                return Err(LabError::PieceCap { cap, needed: xs.len() - 1 });
            }
        }
        let ys: Vec<Rational> = xs.iter().map(|x| self.eval_in_domain(&inner.eval_in_domain(x))).collect();
        Ok(PwaMap { breakpoints: xs, values: ys }.simplified())
    }

    /// `f^n` as a map. `n >= 1`.
    pub fn iterate(&self, n: usize, cap: usize) -> Result<PwaMap> {
        if n == 0 {
            return Err(LabError::Domain("iterate needs n >= 1".into()));
        }
        if self.piece_count() > cap {
            return Err(LabError::PieceCap { cap, needed: self.piece_count() });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc, cap)?;
        }
        Ok(acc)
    }

    /// Exact image `[min f, max f]` of the closure of `iv`.
    pub fn image_of_interval(&self, iv: &Interval) -> Result<Interval> {
        if iv.is_empty() {
            return Err(LabError::Domain(format!("image of empty interval {iv}")));
        }
        let (lo, hi) = (&iv.lo, &iv.hi);
        let mut min = self.eval_in_domain(lo);
        let mut max = min.clone();
        let mut consider = |v: Rational| {
            if v < min {
                min = v.clone();
            }
            if v > max {
                max = v;
            }
        };
        consider(self.eval_in_domain(hi));
        let start = self.breakpoints.partition_point(|b| b <= lo);
        let end = self.breakpoints.partition_point(|b| b < hi);
        for k in start..end {
            consider(self.values[k].clone());
        }
        Ok(Interval::closed(min, max))
    }

    /// Exact `sup |f − g|`, attained at a node of the merged breakpoint list.
    pub fn sup_distance(&self, other: &PwaMap) -> Rational {
        let mut best = Rational::zero();
        for x in self.breakpoints.iter().chain(other.breakpoints.iter()) {
            let d = (self.eval_in_domain(x) - other.eval_in_domain(x)).abs();
            if d > best {
                best = d;
            }
        }
        best
    }

    /// Solution set of `f^r(x) = x` as sorted, merged components.
    pub fn fixed_points_of_iterate(&self, r: usize, cap: usize) -> Result<Vec<FixedComponent>> {
        let h = self.iterate(r, cap)?;
        let comps = (0..h.piece_count()).filter_map(|k| h.piece(k).fixed_set()).collect();
        Ok(merge_components(comps))
    }

    /// Affine pieces of `self` restricted to `dom`.
    pub fn affine_pieces_on(&self, dom: &Interval) -> Vec<AffinePiece> {
        if dom.is_empty() {
            return Vec::new();
        }
        if dom.lo == dom.hi {
            let k = self.piece_index(&dom.lo);
            let mut p = self.piece(k);
            p.dom = dom.clone();
            return vec![p];
        }
        let first = self.piece_index(&dom.lo);
        let mut out = Vec::new();
        for k in first..self.piece_count() {
            if self.breakpoints[k] >= dom.hi {
                break;
            }
            let mut p = self.piece(k);
            p.dom = p.dom.intersect(dom);
            if p.dom.lo < p.dom.hi {
                out.push(p);
            }
        }
        out
    }

    /// Post-compose one affine piece (of some iterate) with `self`, splitting
    /// the domain where the image crosses breakpoints of `self`.
    pub fn post_compose_piece(&self, piece: &AffinePiece) -> Vec<AffinePiece> {
        let dom = &piece.dom;
        if piece.slope.is_zero() || dom.lo == dom.hi {
            let c = piece.eval(&dom.lo);
            let k = self.piece_index(&c);
            let outer = self.piece(k);
            return vec![AffinePiece {
                dom: dom.clone(),
                slope: &outer.slope * &piece.slope,
                intercept: &outer.slope * &piece.intercept + &outer.intercept,
            }];
        }
        let y0 = piece.eval(&dom.lo);
        let y1 = piece.eval(&dom.hi);
        let (lo, hi) = if y0 < y1 { (&y0, &y1) } else { (&y1, &y0) };
        let start = self.breakpoints.partition_point(|b| b <= lo);
        let end = self.breakpoints.partition_point(|b| b < hi);
        let mut cuts: Vec<Rational> =
            self.breakpoints[start..end].iter().map(|b| (b - &piece.intercept) / &piece.slope).collect();
        cuts.sort();
        let mut bounds = vec![dom.lo.clone()];
        bounds.extend(cuts);
        bounds.push(dom.hi.clone());
        let last = bounds.len() - 2;
        (0..=last)
            .map(|i| {
                let sub = Interval {
                    lo: bounds[i].clone(),
                    hi: bounds[i + 1].clone(),
                    closed_lo: if i == 0 { dom.closed_lo } else { true },
                    closed_hi: if i == last { dom.closed_hi } else { true },
                };
                let mid = piece.eval(&Rational::midpoint(&sub.lo, &sub.hi));
                let outer = self.piece(self.piece_index(&mid));
                AffinePiece {
                    slope: &outer.slope * &piece.slope,
                    intercept: &outer.slope * &piece.intercept + &outer.intercept,
                    dom: sub,
                }
            })
            .collect()
    }

    /// Affine pieces of `f^n` restricted to `dom` (identity pieces for `n = 0`).
    pub fn iterate_pieces_on(&self, dom: &Interval, n: usize, cap: usize) -> Result<Vec<AffinePiece>> {
        let mut pieces =
            vec![AffinePiece { dom: dom.clone(), slope: Rational::one(), intercept: Rational::zero() }];
        for _ in 0..n {
            let mut next = Vec::with_capacity(pieces.len());
            for p in &pieces {
                next.extend(self.post_compose_piece(p));
            }
            if next.len() > cap {
                return Err(LabError::PieceCap { cap, needed: next.len() });
            }
            pieces = next;
        }
        Ok(pieces)
    }

    /// Connected components of `dom ∩ f^{-1}(target)` for closed `dom` and
    /// `target`, as closed intervals sorted left to right.
    pub fn preimage_components(&self, dom: &Interval, target: &Interval) -> Vec<Interval> {
        let mut parts: Vec<Interval> = Vec::new();
        for p in self.affine_pieces_on(&dom.closure()) {
            let piece_dom = p.dom.closure();
            let hit = if p.slope.is_zero() {
                target.contains(&p.intercept).then(|| piece_dom.clone())
            } else {
                let u = (&target.lo - &p.intercept) / &p.slope;
                let v = (&target.hi - &p.intercept) / &p.slope;
                let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
                let lo = Rational::max_of(&lo, &piece_dom.lo);
                let hi = Rational::min_of(&hi, &piece_dom.hi);
                (lo <= hi).then(|| Interval::closed(lo, hi))
            };
            if let Some(h) = hit {
                match parts.last_mut() {
                    Some(last) if h.lo <= last.hi => {
                        if h.hi > last.hi {
                            last.hi = h.hi;
                        }
                    }
                    _ => parts.push(h),
                }
            }
        }
        parts
    }

    /// Pointwise check that `self` and `other` agree on every point of `iv`.
    pub fn agrees_on(&self, other: &PwaMap, iv: &Interval) -> bool {
        if iv.is_empty() {
            return true;
        }
        let inside = |x: &Rational| *x >= iv.lo && *x <= iv.hi;
        let mut pts: Vec<&Rational> = vec![&iv.lo, &iv.hi];
        pts.extend(self.breakpoints.iter().filter(|x| inside(x)));
        pts.extend(other.breakpoints.iter().filter(|x| inside(x)));
        pts.into_iter().all(|x| self.eval_in_domain(x) == other.eval_in_domain(x))
    }
}

/// Sort and merge fixed-point components: touching segments fuse, points
/// inside segments disappear, duplicate points collapse.
pub fn merge_components(mut comps: Vec<FixedComponent>) -> Vec<FixedComponent> {
    comps.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo).then(a.interval.hi.cmp(&b.interval.hi)));
    let mut out: Vec<FixedComponent> = Vec::new();
    for c in comps {
        if let Some(last) = out.last_mut() {
            if c.interval.lo <= last.interval.hi {
                if c.interval.hi > last.interval.hi {
                    last.interval.hi = c.interval.hi.clone();
                }
                if last.interval.lo < last.interval.hi {
                    last.kind = FixedKind::Segment;
                }
                continue;
            }
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn double_tent() -> PwaMap {
        PwaMap::new(
            vec![q(0, 1), q(1, 4), q(1, 2), q(3, 4), q(1, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1), q(1, 1), q(0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let t = PwaMap::tent();
        assert_eq!(t.eval(&q(1, 2)).unwrap(), q(1, 1));
        assert_eq!(t.eval(&q(1, 3)).unwrap(), q(2, 3));
        assert_eq!(PwaMap::identity().eval(&q(5, 17)).unwrap(), q(5, 17));
    }

    #[test]
    fn eval_outside_domain_is_error() {
        assert!(matches!(PwaMap::tent().eval(&q(3, 2)), Err(LabError::Domain(_))));
        assert!(PwaMap::tent().eval(&q(-1, 9)).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(PwaMap::new(vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(3, 2)]).is_err());
        assert!(PwaMap::new(vec![q(0, 1), q(1, 2), q(1, 2), q(1, 1)], vec![q(0, 1); 4]).is_err());
        assert!(PwaMap::new(vec![q(1, 8), q(1, 1)], vec![q(0, 1); 2]).is_err());
    }

    #[test]
    fn iterate_tent_twice_is_double_tent() {
        let t2 = PwaMap::tent().iterate(2, DEFAULT_PIECE_CAP).unwrap();
        assert_eq!(t2, double_tent());
        // oracle: pointwise composition at 9 dyadic points
        for j in 0..=8 {
            let x = q(j, 8);
            let t = PwaMap::tent();
            assert_eq!(t2.eval(&x).unwrap(), t.eval(&t.eval(&x).unwrap()).unwrap());
        }
    }

    #[test]
    fn iterate_identity_and_n1() {
        let id = PwaMap::identity();
        assert_eq!(id.iterate(5, DEFAULT_PIECE_CAP).unwrap(), id);
        assert_eq!(double_tent().iterate(1, DEFAULT_PIECE_CAP).unwrap(), double_tent());
        assert!(id.iterate(0, DEFAULT_PIECE_CAP).is_err());
    }

    #[test]
    fn iterate_respects_cap() {
        let err = PwaMap::tent().iterate(6, 16).unwrap_err();
        assert!(matches!(err, LabError::PieceCap { cap: 16, .. }));
    }

    #[test]
    fn image_examples() {
        let t = PwaMap::tent();
        assert_eq!(t.image_of_interval(&Interval::closed(q(0, 1), q(1, 2))).unwrap(), Interval::closed(q(0, 1), q(1, 1)));
        let d = double_tent();
        assert_eq!(
            d.image_of_interval(&Interval::closed(q(5, 16), q(7, 16))).unwrap(),
            Interval::closed(q(1, 4), q(3, 4))
        );
        let iv = Interval::closed(q(1, 5), q(3, 7));
        assert_eq!(PwaMap::identity().image_of_interval(&iv).unwrap(), iv);
        assert!(t.image_of_interval(&Interval::open(q(1, 3), q(1, 3))).is_err());
    }

    #[test]
    fn sup_distance_examples() {
        let t = PwaMap::tent();
        assert_eq!(t.sup_distance(&t), Rational::zero());
        // attained at x = 1, where T(1) = 0
        assert_eq!(t.sup_distance(&PwaMap::identity()), q(1, 1));
        assert_eq!(PwaMap::identity().sup_distance(&t), q(1, 1));
        let f = PwaMap::new(vec![q(0, 1), q(1, 1)], vec![q(1, 10), q(1, 2)]).unwrap();
        let g = PwaMap::new(vec![q(0, 1), q(1, 1)], vec![q(3, 10), q(7, 10)]).unwrap();
        assert_eq!(f.sup_distance(&g), q(1, 5));
    }

    #[test]
    fn sup_distance_grid_oracle() {
        // oracle: dense grid scan at step 1/1024, then exact maximization of
        // |T(x) − x| per affine piece (endpoints of the pieces of T − id).
        let t = PwaMap::tent();
        let id = PwaMap::identity();
        let mut grid_max = Rational::zero();
        for j in 0..=1024 {
            let x = q(j, 1024);
            let d = (t.eval(&x).unwrap() - id.eval(&x).unwrap()).abs();
            if d > grid_max {
                grid_max = d;
            }
        }
        assert_eq!(grid_max, q(1, 1));
        assert_eq!(t.sup_distance(&id), grid_max);
    }

    #[test]
    fn fixed_points_examples() {
        let id = PwaMap::identity();
        let fp = id.fixed_points_of_iterate(1, DEFAULT_PIECE_CAP).unwrap();
        assert_eq!(fp, vec![FixedComponent { interval: Interval::unit(), kind: FixedKind::Segment }]);

        let t = PwaMap::tent();
        let pts: Vec<Rational> =
            t.fixed_points_of_iterate(1, DEFAULT_PIECE_CAP).unwrap().iter().map(|c| c.representative()).collect();
        assert_eq!(pts, vec![q(0, 1), q(2, 3)]);

        let pts2: Vec<Rational> =
            t.fixed_points_of_iterate(2, DEFAULT_PIECE_CAP).unwrap().iter().map(|c| c.representative()).collect();
        assert_eq!(pts2, vec![q(0, 1), q(2, 5), q(2, 3), q(4, 5)]);
    }

    #[test]
    fn fixed_points_sign_change_oracle() {
        // oracle: sign changes of T²(x) − x on a 1/10000 grid, each bracket
        // then solved exactly on its affine branch.
        let t2 = PwaMap::tent().iterate(2, DEFAULT_PIECE_CAP).unwrap();
        let mut found = Vec::new();
        let n = 10000;
        let g = |x: &Rational| t2.eval(x).unwrap() - x;
        for j in 0..n {
            let (a, b) = (q(j, n), q(j + 1, n));
            let (ga, gb) = (g(&a), g(&b));
            if ga.is_zero() {
                found.push(a.clone());
            } else if (ga.is_negative() && gb.is_positive()) || (ga.is_positive() && gb.is_negative()) {
                let x = &a + &ga * (&b - &a) / (&ga - &gb);
                found.push(x);
            }
        }
        if g(&Rational::one()).is_zero() {
            found.push(Rational::one());
        }
        assert_eq!(found, vec![q(0, 1), q(2, 5), q(2, 3), q(4, 5)]);
    }

    #[test]
    fn json_round_trip_and_format() {
        let t = PwaMap::tent();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"breakpoints":["0/1","1/2","1/1"],"values":["0/1","1/1","0/1"]}"#);
        let back: PwaMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<PwaMap>(r#"{"breakpoints":["0/1","1/1"],"values":["0/1","2/1"]}"#).is_err());
    }

    #[test]
    fn iterate_pieces_on_matches_global_iterate() {
        let t = PwaMap::tent();
        let dom = Interval::closed(q(1, 7), q(5, 9));
        let pieces = t.iterate_pieces_on(&dom, 3, DEFAULT_PIECE_CAP).unwrap();
        let t3 = t.iterate(3, DEFAULT_PIECE_CAP).unwrap();
        for p in &pieces {
            for x in [&p.dom.lo, &p.dom.hi] {
                assert_eq!(p.eval(x), t3.eval(x).unwrap());
            }
        }
    }
}
