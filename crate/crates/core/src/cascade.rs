//! Atom doubling cascades indexed by triangular bit matrices.
//!
//! Stage 1 plants a 2-horseshoe in `J̄ = [a, b]`: with `u = (b − a)/8` the
//! atoms are `[a+2u, a+3u]` (increasing) and `[a+5u, a+6u]` (decreasing),
//! both mapped affinely onto `H⁺ = [a+1.5u, a+6.5u]`.
//!
//! Stage `n+1` replaces the affine branch on every generation-`n` atom `A`
//! (mapped onto `B⁺`, an enlargement of the atom `B` indexed by `σ[t]`) by an
//! N-shaped branch with three equal legs over the same range. Each
//! generation-`(n+1)` atom is the pull-back, through leg 1 or leg 2, of an
//! enlargement `C⁺` of a generation-`n` atom `C ⊂ B`. The top-right entry of
//! the new matrix picks the leg; the rest of the new diagonal picks `C`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::horseshoe::strictly_inside;
use crate::interval::Interval;
use crate::pwa::PwaMap;
use crate::rational::Rational;
use crate::Verdict;

/// Triangular matrix with rows `i = 1..=n` of lengths `n + 1 − i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct TriMatrix {
    rows: Vec<Vec<u8>>,
}

impl TryFrom<Vec<Vec<u8>>> for TriMatrix {
    type Error = LabError;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        TriMatrix::from_rows(rows)
    }
}

impl From<TriMatrix> for Vec<Vec<u8>> {
    fn from(t: TriMatrix) -> Self {
        t.rows
    }
}

impl fmt::Display for TriMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (j, b) in r.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{b}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for TriMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl TriMatrix {
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n - i {
                return Err(LabError::Domain(format!("row {} has length {}, expected {}", i + 1, r.len(), n - i)));
            }
            if r.iter().any(|&b| b > 1) {
                return Err(LabError::Domain("entries must be 0 or 1".into()));
            }
        }
        Ok(TriMatrix { rows })
    }

    pub fn zeros(n: usize) -> Self {
        TriMatrix { rows: (0..n).map(|i| vec![0; n - i]).collect() }
    }

    pub fn empty() -> Self {
        TriMatrix { rows: Vec::new() }
    }

    /// Entry count `n(n+1)/2`.
    pub fn entry_count(n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// The matrix whose entries, read row by row, are the bits of `index`
    /// (least significant first).
    pub fn from_index(n: usize, index: u64) -> Self {
        let mut p = 0;
        let rows = (0..n)
            .map(|i| {
                (0..n - i)
                    .map(|_| {
                        let b = ((index >> p) & 1) as u8;
                        p += 1;
                        b
                    })
                    .collect()
            })
            .collect();
        TriMatrix { rows }
    }

    pub fn all(n: usize) -> impl Iterator<Item = TriMatrix> {
        (0..1u64 << Self::entry_count(n)).map(move |i| TriMatrix::from_index(n, i))
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// `t_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.rows[i - 1][j - 1]
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// Erase the last diagonal.
    pub fn project(&self) -> Result<TriMatrix> {
        if self.n() == 0 {
            return Err(LabError::Domain("cannot project an empty matrix".into()));
        }
        let n = self.n() - 1;
        Ok(TriMatrix { rows: (0..n).map(|i| self.rows[i][..n - i].to_vec()).collect() })
    }

    /// Erase the first column: `s_{i,j} = t_{i+1,j}`.
    pub fn shift(&self) -> Result<TriMatrix> {
        if self.n() == 0 {
            return Err(LabError::Domain("cannot shift an empty matrix".into()));
        }
        Ok(TriMatrix { rows: self.rows[1..].to_vec() })
    }

    /// Extend by a new last diagonal `d`, where `d[i-1] = t_{i, n+2-i}`.
    pub fn embed(&self, diag: &[u8]) -> Result<TriMatrix> {
        let n = self.n();
        if diag.len() != n + 1 || diag.iter().any(|&b| b > 1) {
            return Err(LabError::Domain(format!("diagonal must have {} bits", n + 1)));
        }
        let mut rows: Vec<Vec<u8>> = self.rows.clone();
        rows.push(Vec::new());
        for (i, r) in rows.iter_mut().enumerate() {
            r.push(diag[i]);
        }
        Ok(TriMatrix { rows })
    }

    /// All one-diagonal extensions, ordered by the diagonal read as a
    /// binary number with `t_{1,n+1}` least significant.
    pub fn children(&self) -> impl Iterator<Item = TriMatrix> + '_ {
        let k = self.n() + 1;
        (0..1u32 << k).map(move |m| {
            let diag: Vec<u8> = (0..k).map(|i| ((m >> i) & 1) as u8).collect();
            self.embed(&diag).expect("valid diagonal")
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeAtom {
    pub matrix: TriMatrix,
    pub interval: Interval,
}

/// Finite-depth cascade: the stage maps `f_1..f_N`, the atoms of every
/// generation and the stage-to-stage sup distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeAtoms {
    pub j: Interval,
    pub i: Interval,
    pub iprime: Interval,
    pub depth: usize,
    pub maps: Vec<PwaMap>,
    pub generations: Vec<Vec<CascadeAtom>>,
    pub cauchy: Vec<Rational>,
}

impl CascadeAtoms {
    pub fn map(&self) -> &PwaMap {
        self.maps.last().expect("depth >= 1")
    }

    fn lookup(&self) -> Vec<BTreeMap<&TriMatrix, &Interval>> {
        self.generations.iter().map(|g| g.iter().map(|a| (&a.matrix, &a.interval)).collect()).collect()
    }

    pub fn atom(&self, t: &TriMatrix) -> Option<&Interval> {
        let n = t.n();
        if n == 0 || n > self.generations.len() {
            return None;
        }
        self.generations[n - 1].iter().find(|a| a.matrix == *t).map(|a| &a.interval)
    }
}

/// Per-atom bookkeeping while building: the closed atom and the range its
/// branch covers, with orientation.
struct Branch {
    atom: Interval,
    range: Interval,
    increasing: bool,
}

fn quarter_margin(c: &Interval, sorted_gen: &[&Interval], parent: &Interval) -> Rational {
    let pos = sorted_gen.partition_point(|iv| iv.lo < c.lo);
    let mut m = Rational::min_of(&(&c.lo - &parent.lo), &(&parent.hi - &c.hi));
    if pos > 0 {
        m = Rational::min_of(&m, &c.gap_to(sorted_gen[pos - 1]));
    }
    if pos + 1 < sorted_gen.len() {
        m = Rational::min_of(&m, &c.gap_to(sorted_gen[pos + 1]));
    }
    m / Rational::integer(4)
}

/// Pull back `target ⊂ int(range)` through the affine leg `[x0, x1]` that
/// maps onto `range` with the given orientation.
fn leg_preimage(x0: &Rational, x1: &Rational, range: &Interval, increasing: bool, target: &Interval) -> Interval {
    let scale = (x1 - x0) / range.length();
    let (u, v) = if increasing {
        (x0 + (&target.lo - &range.lo) * &scale, x0 + (&target.hi - &range.lo) * &scale)
    } else {
        (x0 + (&range.hi - &target.hi) * &scale, x0 + (&range.hi - &target.lo) * &scale)
    };
    Interval::closed(u, v)
}

/// Validates `Ī' ⊋ Ī ⊋ I ⊇ J̄` for open, nonempty `J, I, I'`.
pub fn check_geometry(j: &Interval, i: &Interval, iprime: &Interval) -> Result<()> {
    for (name, iv) in [("J", j), ("I", i), ("I'", iprime)] {
        if iv.lo >= iv.hi {
            return Err(LabError::Precondition(format!("{name} = {iv} is empty")));
        }
    }
    if !j.closure().is_subset_of(i) {
        return Err(LabError::Precondition(format!("closure of J = {j} not inside I = {i}")));
    }
    if !(i.closure().is_subset_of(iprime) && i.closure() != iprime.closure()) {
        return Err(LabError::Precondition(format!("closure of I = {i} not strictly inside I' = {iprime}")));
    }
    Ok(())
}

pub fn build_cascade_map(j: &Interval, i: &Interval, iprime: &Interval, depth: usize) -> Result<CascadeAtoms> {
    check_geometry(j, i, iprime)?;
    if depth == 0 {
        return Err(LabError::Domain("depth must be at least 1".into()));
    }
    let r = Rational::integer;
    let a = j.lo.clone();
    let u = j.length() / r(8);
    let at = |k: Rational| &a + k * &u;
    let h = Interval::closed(at(r(2)), at(r(6)));
    let h_plus = Interval::closed(at(Rational::new(3, 2)), at(Rational::new(13, 2)));
    let i0 = Interval::closed(at(r(2)), at(r(3)));
    let i1 = Interval::closed(at(r(5)), at(r(6)));
    let f1 = PwaMap::from_nodes(vec![
        (Rational::zero(), h_plus.lo.clone()),
        (i0.lo.clone(), h_plus.lo.clone()),
        (i0.hi.clone(), h_plus.hi.clone()),
        (i1.lo.clone(), h_plus.hi.clone()),
        (i1.hi.clone(), h_plus.lo.clone()),
        (Rational::one(), h_plus.lo.clone()),
    ])?;
    let mut maps = vec![f1];
    let t0 = TriMatrix::from_rows(vec![vec![0]])?;
    let t1 = TriMatrix::from_rows(vec![vec![1]])?;
    let mut generations: Vec<BTreeMap<TriMatrix, Branch>> = vec![BTreeMap::from([
        (t0, Branch { atom: i0, range: h_plus.clone(), increasing: true }),
        (t1, Branch { atom: i1, range: h_plus.clone(), increasing: false }),
    ])];
    // enlargements C⁺ per generation; index 0 is the hull H
    let mut plus: Vec<BTreeMap<TriMatrix, Interval>> = vec![BTreeMap::from([(TriMatrix::empty(), h_plus)])];
    let mut hulls: Vec<BTreeMap<TriMatrix, Interval>> = vec![BTreeMap::from([(TriMatrix::empty(), h)])];
    let mut cauchy = Vec::new();

    for n in 1..depth {
        let gen = &generations[n - 1];
        // enlargements of generation-n atoms
        let mut sorted: Vec<&Interval> = gen.values().map(|b| &b.atom).collect();
        sorted.sort_by(|x, y| x.lo.cmp(&y.lo));
        let mut gen_plus = BTreeMap::new();
        for (t, b) in gen {
            let m = if n == 1 {
                &u / r(8)
            } else {
                let parent = &hulls[n - 1][&t.project()?];
                quarter_margin(&b.atom, &sorted, parent)
            };
            gen_plus.insert(t.clone(), b.atom.enlarged(&m));
        }
        plus.push(gen_plus);
        hulls.push(gen.iter().map(|(t, b)| (t.clone(), b.atom.clone())).collect());

        let prev = maps.last().unwrap();
        let inside = |x: &Rational| gen.values().any(|b| b.atom.interior().contains(x));
        let mut nodes: Vec<(Rational, Rational)> =
            prev.nodes().filter(|(x, _)| !inside(x)).map(|(x, y)| (x.clone(), y.clone())).collect();
        let mut next_gen = BTreeMap::new();
        for (t, b) in gen {
            let len3 = b.atom.length() / r(3);
            let xs = [b.atom.lo.clone(), &b.atom.lo + &len3, &b.atom.hi - &len3, b.atom.hi.clone()];
            let (lo, hi) = (b.range.lo.clone(), b.range.hi.clone());
            let ys = if b.increasing { [lo.clone(), hi.clone(), lo, hi] } else { [hi.clone(), lo.clone(), hi, lo] };
            for (x, y) in xs.iter().zip(ys.iter()) {
                nodes.push((x.clone(), y.clone()));
            }
            let sigma = t.shift()?;
            for s in t.children() {
                let leg = s.get(1, n + 1) as usize;
                let c = s.shift()?;
                debug_assert_eq!(c.project()?, sigma);
                let target = &plus[n][&c];
                let incr = if leg == 0 { b.increasing } else { !b.increasing };
                let atom = leg_preimage(&xs[leg], &xs[leg + 1], &b.range, incr, target);
                next_gen.insert(s, Branch { atom, range: target.clone(), increasing: incr });
            }
        }
        let next_map = PwaMap::from_nodes(nodes)?;
        cauchy.push(next_map.sup_distance(prev));
        maps.push(next_map);
        generations.push(next_gen);
    }

    let generations = generations
        .into_iter()
        .map(|g| g.into_iter().map(|(matrix, b)| CascadeAtom { matrix, interval: b.atom }).collect())
        .collect();
    Ok(CascadeAtoms { j: j.clone(), i: i.clone(), iprime: iprime.clone(), depth, maps, generations, cauchy })
}

/// Outcome of the independent cascade check; `violation` names the first
/// failing generation and matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub ok: bool,
    pub violation: Option<String>,
    pub atom_counts: Vec<usize>,
    pub max_lengths: Vec<Rational>,
}

pub fn verify_cascade(ca: &CascadeAtoms) -> CascadeReport {
    let mut report = CascadeReport { ok: false, violation: None, atom_counts: Vec::new(), max_lengths: Vec::new() };
    match check_cascade(ca, &mut report) {
        Ok(()) => report.ok = true,
        Err(v) => report.violation = Some(v),
    }
    report
}

fn check_cascade(ca: &CascadeAtoms, report: &mut CascadeReport) -> std::result::Result<(), String> {
    check_geometry(&ca.j, &ca.i, &ca.iprime).map_err(|e| e.to_string())?;
    if ca.depth == 0 || ca.maps.len() != ca.depth || ca.generations.len() != ca.depth || ca.cauchy.len() + 1 != ca.depth {
        return Err("depth does not match the stored maps, generations and bounds".into());
    }
    let f = ca.map();
    let lookup = ca.lookup();
    let get = |t: &TriMatrix| -> &Interval { lookup[t.n() - 1][t] };
    for (g, gen) in ca.generations.iter().enumerate() {
        let n = g + 1;
        let expected = 1usize << TriMatrix::entry_count(n);
        report.atom_counts.push(gen.len());
        if gen.len() != expected || lookup[g].len() != expected || gen.iter().any(|a| a.matrix.n() != n) {
            return Err(format!("generation {n}: expected {expected} distinct atoms indexed by T_{n}"));
        }
        let mut sorted: Vec<&CascadeAtom> = gen.iter().collect();
        sorted.sort_by(|x, y| x.interval.lo.cmp(&y.interval.lo));
        for w in sorted.windows(2) {
            if w[0].interval.intersects(&w[1].interval) {
                return Err(format!("generation {n}, matrix {}: meets atom {}", w[0].matrix, w[1].matrix));
            }
        }
        let bound = Rational::pow2_neg(n as u32);
        let mut max_len = Rational::zero();
        for a in gen {
            let iv = &a.interval;
            let tag = || format!("generation {n}, matrix {}", a.matrix);
            if iv.lo >= iv.hi || !iv.closed_lo || !iv.closed_hi {
                return Err(format!("{}: not a compact interval with interior", tag()));
            }
            if !iv.is_subset_of(&ca.j.closure()) {
                return Err(format!("{}: outside the closure of J", tag()));
            }
            if iv.length() >= bound {
                return Err(format!("{}: length {} not below 2^-{n}", tag(), iv.length()));
            }
            if iv.length() > max_len {
                max_len = iv.length();
            }
            let img = f.image_of_interval(iv).map_err(|e| e.to_string())?;
            if !img.is_subset_of(&ca.iprime) {
                return Err(format!("{}: image leaves I'", tag()));
            }
            if n == 1 {
                for b in gen {
                    if !strictly_inside(&b.interval, &img) {
                        return Err(format!("{}: image interior misses atom {}", tag(), b.matrix));
                    }
                }
                continue;
            }
            let pi = a.matrix.project().unwrap();
            let sigma = a.matrix.shift().unwrap();
            if !iv.is_subset_of(&get(&pi).interior()) {
                return Err(format!("{}: not inside parent {pi}", tag()));
            }
            if !strictly_inside(get(&sigma), &img) {
                return Err(format!("{}: image interior does not strictly contain atom {sigma}", tag()));
            }
            if n >= 3 {
                let ps = sigma.project().unwrap();
                if !img.is_subset_of(&get(&ps).interior()) {
                    return Err(format!("{}: image not inside atom {ps}", tag()));
                }
            }
            let slope_floor = Rational::pow2_neg(n as u32 - 1).recip();
            if f.affine_pieces_on(iv).iter().any(|p| p.slope.abs() <= slope_floor) {
                return Err(format!("{}: slope not above 2^{}", tag(), n - 1));
            }
        }
        report.max_lengths.push(max_len);
    }
    for (k, w) in ca.maps.windows(2).enumerate() {
        let n = k + 1;
        let d = w[1].sup_distance(&w[0]);
        if d != ca.cauchy[k] {
            return Err(format!("stage {n}: stored bound {} differs from {d}", ca.cauchy[k]));
        }
        if d >= Rational::pow2_neg(n as u32) * Rational::integer(2) {
            return Err(format!("stage {n}: sup distance {d} not below 2^{}", 1 - n as i64));
        }
        let mut atoms: Vec<&Interval> = ca.generations[k].iter().map(|a| &a.interval).collect();
        atoms.sort_by(|x, y| x.lo.cmp(&y.lo));
        let mut left = Rational::zero();
        for iv in atoms.iter().chain(std::iter::once(&&Interval::point(Rational::one()))) {
            if !w[1].agrees_on(&w[0], &Interval::closed(left.clone(), iv.lo.clone())) {
                return Err(format!("stage {n}: maps differ outside generation-{n} atoms"));
            }
            left = iv.hi.clone();
        }
    }
    Ok(())
}

/// Matrix `[t]_n` of the generation-`n` atom containing `x`.
pub fn itinerary(ca: &CascadeAtoms, x: &Rational, n: usize) -> Verdict<TriMatrix> {
    if n == 0 || n > ca.depth {
        return Verdict::Refused(format!("depth {n} outside 1..={}", ca.depth));
    }
    let lookup = ca.lookup();
    let mut cur: Option<TriMatrix> = None;
    for k in 1..=n {
        let candidates: Vec<TriMatrix> = match &cur {
            None => TriMatrix::all(1).collect(),
            Some(t) => t.children().collect(),
        };
        match candidates.into_iter().find(|c| lookup[k - 1][c].contains(x)) {
            Some(c) => cur = Some(c),
            None => return Verdict::Refused(format!("{x} escapes generation {k}")),
        }
    }
    Verdict::Accepted(cur.unwrap())
}

/// A map close to `f` carrying a cascade in a small window around a fixed
/// point of `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedCascade {
    pub x0: Rational,
    pub radius: Rational,
    pub cascade: CascadeAtoms,
    pub sup_distance: Rational,
}

/// Splice the cascade on `J = (x0 − r/4, x0 + r/4)` into `f`: `g = f` off
/// `I' = (x0 − r, x0 + r)`, affine in between. `r` is halved until
/// `sup|g − f| < ε`.
pub fn embed_cascade(f: &PwaMap, epsilon: &Rational, depth: usize) -> Result<EmbeddedCascade> {
    if !epsilon.is_positive() {
        return Err(LabError::Domain("epsilon must be positive".into()));
    }
    let comps = f.fixed_points_of_iterate(1, crate::DEFAULT_PIECE_CAP)?;
    let x0 = comps
        .iter()
        .map(|c| c.interval.midpoint())
        .find(|x| x.is_positive() && *x < Rational::one())
        .ok_or_else(|| LabError::Precondition("no interior fixed point".into()))?;
    let mut radius = Rational::min_of(&(epsilon / Rational::integer(6)), &Rational::min_of(&x0, &(Rational::one() - &x0)));
    for _ in 0..200 {
        let ball = |k: i64| Interval::open(&x0 - &radius / Rational::integer(k), &x0 + &radius / Rational::integer(k));
        let (j, i, ip) = (ball(4), ball(2), ball(1));
        let mut ca = build_cascade_map(&j, &i, &ip, depth)?;
        let splice = |m: &PwaMap| -> Result<PwaMap> {
            let mut nodes: Vec<(Rational, Rational)> = f
                .nodes()
                .filter(|(x, _)| **x <= ip.lo || **x >= ip.hi)
                .map(|(x, y)| (x.clone(), y.clone()))
                .collect();
            nodes.push((ip.lo.clone(), f.eval_in_domain(&ip.lo)));
            nodes.push((ip.hi.clone(), f.eval_in_domain(&ip.hi)));
            nodes.extend(m.nodes().filter(|(x, _)| **x >= j.lo && **x <= j.hi).map(|(x, y)| (x.clone(), y.clone())));
            nodes.push((j.lo.clone(), m.eval_in_domain(&j.lo)));
            nodes.push((j.hi.clone(), m.eval_in_domain(&j.hi)));
            PwaMap::from_nodes(nodes)
        };
        ca.maps = ca.maps.iter().map(splice).collect::<Result<_>>()?;
        let d = ca.map().sup_distance(f);
        if d < *epsilon {
            return Ok(EmbeddedCascade { x0, radius, cascade: ca, sup_distance: d });
        }
        radius = &radius / Rational::integer(2);
    }
    Err(LabError::Internal("cascade splice did not reach the requested distance".into()))
}

/// The default geometry `J = (1/8, 7/8)`, `I = (1/16, 15/16)`, `I' = (0, 1)`.
pub fn default_geometry() -> (Interval, Interval, Interval) {
    (
        Interval::open(Rational::new(1, 8), Rational::new(7, 8)),
        Interval::open(Rational::new(1, 16), Rational::new(15, 16)),
        Interval::open(Rational::zero(), Rational::one()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn tm(rows: Vec<Vec<u8>>) -> TriMatrix {
        TriMatrix::from_rows(rows).unwrap()
    }

    fn default_cascade(n: usize) -> CascadeAtoms {
        let (j, i, ip) = default_geometry();
        build_cascade_map(&j, &i, &ip, n).unwrap()
    }

    #[test]
    fn projection_and_shift() {
        assert_eq!(tm(vec![vec![1, 0], vec![1]]).project().unwrap(), tm(vec![vec![1]]));
        assert_eq!(tm(vec![vec![1, 0], vec![1]]).shift().unwrap(), tm(vec![vec![1]]));
        assert_eq!(TriMatrix::zeros(4).shift().unwrap(), TriMatrix::zeros(3));
        let t3 = tm(vec![vec![0, 1, 1], vec![1, 0], vec![1]]);
        assert_eq!(t3.shift().unwrap().shift().unwrap(), tm(vec![vec![1]]));
        let t = tm(vec![vec![1, 0], vec![1]]);
        assert_eq!(t.embed(&[0, 1, 1]).unwrap().project().unwrap(), t);
        assert_eq!(TriMatrix::entry_count(3), 6);
        assert_eq!(TriMatrix::all(3).count(), 64);
        assert!(TriMatrix::from_rows(vec![vec![1], vec![1]]).is_err());
    }

    #[test]
    fn shift_and_project_commute() {
        for t in TriMatrix::all(3) {
            assert_eq!(t.shift().unwrap().project().unwrap(), t.project().unwrap().shift().unwrap());
        }
    }

    #[test]
    fn depth_one_is_horseshoe() {
        let ca = default_cascade(1);
        assert_eq!(ca.generations[0].len(), 2);
        let f = ca.map();
        for a in &ca.generations[0] {
            let img = f.image_of_interval(&a.interval).unwrap();
            for b in &ca.generations[0] {
                assert!(strictly_inside(&b.interval, &img));
            }
        }
        assert!(verify_cascade(&ca).ok);
    }

    #[test]
    fn depth_three_counts_and_bounds() {
        let ca = default_cascade(3);
        let r = verify_cascade(&ca);
        assert!(r.ok, "{:?}", r.violation);
        assert_eq!(r.atom_counts, vec![2, 8, 64]);
        assert!(ca.cauchy[1] < q(1, 2));
        assert!(ca.cauchy[0] < q(1, 1));
    }

    #[test]
    fn widened_atom_is_caught() {
        let mut ca = default_cascade(3);
        let a = &mut ca.generations[2][5];
        let name = a.matrix.to_string();
        a.interval = a.interval.enlarged(&q(1, 8));
        let r = verify_cascade(&ca);
        assert!(!r.ok);
        let v = r.violation.unwrap();
        assert!(v.contains("generation 3") && v.contains(&name), "{v}");
    }

    #[test]
    fn itinerary_descends_and_projects() {
        let ca = default_cascade(3);
        for a in &ca.generations[2] {
            assert_eq!(itinerary(&ca, &a.interval.lo, 3).accepted().unwrap(), a.matrix);
            let x = a.interval.midpoint();
            let t3 = itinerary(&ca, &x, 3).accepted().unwrap();
            assert_eq!(t3.project().unwrap(), itinerary(&ca, &x, 2).accepted().unwrap());
        }
        assert!(!itinerary(&ca, &q(1, 100), 1).is_accepted());
        assert!(!itinerary(&ca, &q(1, 2), 4).is_accepted());
    }

    #[test]
    fn golden_fixtures() {
        for (n, text) in [
            (1, include_str!("../fixtures/cascade_depth1.json")),
            (2, include_str!("../fixtures/cascade_depth2.json")),
            (3, include_str!("../fixtures/cascade_depth3.json")),
        ] {
            let golden: CascadeAtoms = serde_json::from_str(text).unwrap();
            assert_eq!(golden, default_cascade(n));
        }
    }

    #[test]
    fn embedding_near_fixed_point() {
        let e = embed_cascade(&PwaMap::tent(), &q(1, 10), 2).unwrap();
        assert_eq!(e.x0, q(2, 3));
        assert!(e.sup_distance < q(1, 10));
        assert!(verify_cascade(&e.cascade).ok);
    }

    #[test]
    fn bad_geometry_rejected() {
        let j = Interval::open(q(1, 8), q(7, 8));
        assert!(build_cascade_map(&j, &j, &Interval::open(q(0, 1), q(1, 1)), 1).is_err());
    }
}
