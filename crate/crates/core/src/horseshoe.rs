//! m-horseshoes, their atom trees, C⁰-hyperbolicity and Bernoulli weights,
//! and the perturbation that plants a horseshoe next to a fixed point.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::pwa::PwaMap;
use crate::rational::Rational;
use crate::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horseshoe {
    pub m: usize,
    pub intervals: Vec<Interval>,
}

/// `true` when the closed set `inner` lies in the interior of `outer` and
/// the two differ.
pub fn strictly_inside(inner: &Interval, outer: &Interval) -> bool {
    inner.closure().is_subset_of(&outer.interior()) && inner.closure() != outer.closure()
}

pub fn verify_horseshoe(map: &PwaMap, intervals: &[Interval]) -> Verdict<Horseshoe> {
    let m = intervals.len();
    if m < 2 {
        return Verdict::Refused(format!("a horseshoe needs at least 2 intervals, got {m}"));
    }
    for (i, iv) in intervals.iter().enumerate() {
        if iv.lo >= iv.hi {
            return Verdict::Refused(format!("interval {} = {iv} has empty interior", i + 1));
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            if intervals[a].closure().intersects(&intervals[b].closure()) {
                return Verdict::Refused(format!("disjointness: intervals {} and {} meet", a + 1, b + 1));
            }
        }
    }
    for (i, iv) in intervals.iter().enumerate() {
        let img = map.image_of_interval(&iv.closure()).expect("nonempty interval");
        if let Some(j) = intervals.iter().position(|other| !strictly_inside(other, &img)) {
            return Verdict::Refused(format!(
                "covering: int f(I_{}) = int {img} does not strictly contain I_{} = {}",
                i + 1,
                j + 1,
                intervals[j]
            ));
        }
    }
    Verdict::Accepted(Horseshoe { m, intervals: intervals.iter().map(Interval::closure).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub word: Vec<usize>,
    pub interval: Interval,
}

/// Generations of atoms; `generations[k]` holds the `m^{k+1}` atoms of
/// generation `k + 1`, in lexicographic word order. Letters are `1..=m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomTree {
    pub m: usize,
    pub generations: Vec<Vec<Atom>>,
}

impl AtomTree {
    pub fn depth(&self) -> usize {
        self.generations.len()
    }

    fn index_of(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &l| acc * self.m + (l - 1))
    }

    pub fn atom(&self, word: &[usize]) -> Option<&Atom> {
        if word.is_empty() || word.len() > self.depth() || word.iter().any(|&l| l == 0 || l > self.m) {
            return None;
        }
        self.generations[word.len() - 1].get(self.index_of(word))
    }

    pub fn max_length(&self, generation: usize) -> Rational {
        self.generations[generation - 1].iter().map(|a| a.interval.length()).max().unwrap_or_else(Rational::zero)
    }
}

/// Exact component of `parent ∩ f^{-1}(target)` that is mapped onto
/// `target` and lies in the interior of `parent`; the leftmost one.
pub fn exact_preimage(map: &PwaMap, parent: &Interval, target: &Interval) -> Option<Interval> {
    map.preimage_components(parent, target).into_iter().find(|c| {
        c.is_subset_of(&parent.interior()) && map.image_of_interval(c).map(|im| im == target.closure()).unwrap_or(false)
    })
}

/// Margin used to enlarge a target atom before pulling it back: a quarter
/// of the smallest of its length, its gaps to the other atoms of its
/// generation and its slack inside `room`.
fn enlargement(target: &Interval, siblings: &[&Interval], room: &Interval) -> Rational {
    let mut m = target.length();
    for s in siblings {
        if *s != target {
            let g = target.gap_to(s);
            if g < m {
                m = g;
            }
        }
    }
    let slack = Rational::min_of(&(&target.lo - &room.lo), &(&room.hi - &target.hi));
    Rational::min_of(&m, &slack) / Rational::integer(4)
}

/// Pull back each atom of generation `k` through each parent of the same
/// generation: the child word `(i_1, …, i_{k+1})` lives in atom `(i_1..i_k)`
/// and maps onto an enlargement of atom `(i_2..i_{k+1})`.
pub fn build_atoms(map: &PwaMap, hs: &Horseshoe, n: usize) -> Result<AtomTree> {
    let m = hs.m;
    let mut tree = AtomTree {
        m,
        generations: vec![hs
            .intervals
            .iter()
            .enumerate()
            .map(|(i, iv)| Atom { word: vec![i + 1], interval: iv.closure() })
            .collect()],
    };
    for _ in 1..n {
        let prev = tree.generations.last().unwrap();
        let k = prev[0].word.len();
        let siblings: Vec<&Interval> = prev.iter().map(|a| &a.interval).collect();
        let mut next = Vec::with_capacity(prev.len() * m);
        for parent in prev {
            let room = map.image_of_interval(&parent.interval)?;
            for letter in 1..=m {
                let mut child_word = parent.word.clone();
                child_word.push(letter);
                let target = tree.atom(&child_word[1..]).expect("shifted word exists");
                debug_assert_eq!(target.word.len(), k);
                let eta = enlargement(&target.interval, &siblings, &room);
                let wide = target.interval.enlarged(&eta);
                let iv = exact_preimage(map, &parent.interval, &wide).ok_or_else(|| {
                    LabError::Internal(format!("no qualifying component for word {child_word:?}"))
                })?;
                next.push(Atom { word: child_word, interval: iv });
            }
        }
        tree.generations.push(next);
    }
    Ok(tree)
}

/// Independent check of all atom-tree invariants.
pub fn verify_atom_tree(map: &PwaMap, tree: &AtomTree) -> Verdict<()> {
    let m = tree.m;
    for (g, gen) in tree.generations.iter().enumerate() {
        let n = g + 1;
        if gen.len() != m.pow(n as u32) {
            return Verdict::Refused(format!("generation {n} has {} atoms, expected {}", gen.len(), m.pow(n as u32)));
        }
        let mut sorted: Vec<&Atom> = gen.iter().collect();
        sorted.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
        for w in sorted.windows(2) {
            if w[0].interval.intersects(&w[1].interval) {
                return Verdict::Refused(format!("generation {n}: atoms {:?} and {:?} meet", w[0].word, w[1].word));
            }
        }
        if n == 1 {
            continue;
        }
        for a in gen {
            let parent = tree.atom(&a.word[..n - 1]).expect("parent");
            if !a.interval.is_subset_of(&parent.interval.interior()) {
                return Verdict::Refused(format!("atom {:?} not inside its parent", a.word));
            }
            let shifted = tree.atom(&a.word[1..]).expect("shift");
            let img = map.image_of_interval(&a.interval).expect("nonempty atom");
            if !strictly_inside(&shifted.interval, &img) {
                return Verdict::Refused(format!("atom {:?}: image does not strictly contain {:?}", a.word, shifted.word));
            }
        }
    }
    Verdict::Accepted(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicityCertificate {
    pub lambda: Rational,
    pub depth: usize,
    pub max_lengths: Vec<Rational>,
}

pub fn verify_c0_hyperbolic(tree: &AtomTree, lambda: &Rational, n: usize) -> Verdict<HyperbolicityCertificate> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Verdict::Refused(format!("lambda {lambda} not in (0,1)"));
    }
    if n > tree.depth() {
        return Verdict::Refused(format!("tree has only {} generations, {n} requested", tree.depth()));
    }
    let mut max_lengths = Vec::with_capacity(n);
    let mut bound = Rational::one();
    for k in 1..=n {
        bound = &bound * lambda;
        let len = tree.max_length(k);
        if len >= bound {
            return Verdict::Refused(format!("generation {k}: max length {len} >= {lambda}^{k}"));
        }
        max_lengths.push(len);
    }
    Verdict::Accepted(HyperbolicityCertificate { lambda: lambda.clone(), depth: n, max_lengths })
}

/// Bernoulli weight `1/m^n` of the atom with the given word (`1` for the
/// empty word).
pub fn bernoulli_weights(tree: &AtomTree, word: &[usize]) -> Result<Rational> {
    if !word.is_empty() && tree.atom(word).is_none() {
        return Err(LabError::Domain(format!("word {word:?} not in the tree")));
    }
    Ok(Rational::new(1, tree.m as i64).powi(word.len() as u32))
}

/// `H(𝒜_n, μ) / log m`, computed from the weights: each weight is checked
/// to be an exact power `m^{-e}`, and the sum `Σ μ(A)·e` is returned. Also
/// checks that the weights add up to one and that each parent's weight is
/// the sum of its children's.
pub fn bernoulli_entropy_coefficient(tree: &AtomTree, n: usize) -> Result<Rational> {
    if n == 0 {
        return Ok(Rational::zero());
    }
    if n > tree.depth() {
        return Err(LabError::Domain(format!("generation {n} beyond tree depth {}", tree.depth())));
    }
    let base = Rational::integer(tree.m as i64);
    let mut total = Rational::zero();
    let mut h = Rational::zero();
    for a in &tree.generations[n - 1] {
        let w = bernoulli_weights(tree, &a.word)?;
        let mut e = 0u32;
        let mut x = w.clone();
        while x < Rational::one() {
            x = &x * &base;
            e += 1;
        }
        if x != Rational::one() {
            return Err(LabError::Internal(format!("weight {w} is not a power of 1/{}", tree.m)));
        }
        if n > 1 {
            let parent = bernoulli_weights(tree, &a.word[..n - 1])?;
            let kids: Rational = (1..=tree.m)
                .map(|l| {
                    let mut wd = a.word[..n - 1].to_vec();
                    wd.push(l);
                    bernoulli_weights(tree, &wd).unwrap()
                })
                .sum();
            if kids != parent {
                return Err(LabError::Internal(format!("weights not additive below {:?}", &a.word[..n - 1])));
            }
        }
        h += &w * Rational::integer(e as i64);
        total += w;
    }
    if total != Rational::one() {
        return Err(LabError::Internal(format!("generation {n} weights sum to {total}")));
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorseshoePerturbation {
    pub map: PwaMap,
    pub x0: Rational,
    pub window: Interval,
    pub nodes: Vec<Rational>,
    pub horseshoe: Horseshoe,
    pub tree: AtomTree,
    pub certificate: HyperbolicityCertificate,
    pub sup_distance: Rational,
}

/// Replace `f` on a window `J ∋ x0` of length `< 1/q` by a zig-zag through
/// `m + 1` equally spaced nodes in the middle half of `J`, alternating
/// between the two ends of `J`.
pub fn build_horseshoe_perturbation(
    f: &PwaMap,
    x0: &Rational,
    epsilon: &Rational,
    m: usize,
    q: u64,
    depth: usize,
) -> Result<HorseshoePerturbation> {
    if f.eval(x0)? != *x0 {
        return Err(LabError::Precondition(format!("{x0} is not a fixed point")));
    }
    if m < 2 || !epsilon.is_positive() || q == 0 || depth == 0 {
        return Err(LabError::Domain("need m >= 2, epsilon > 0, q >= 1, depth >= 1".into()));
    }
    let one = Rational::one();
    let mut w = Rational::new(1, 4 * q as i64);
    for _ in 0..200 {
        let a = Rational::max_of(&(x0 - &w), &Rational::zero());
        let b = Rational::min_of(&(x0 + &w), &one);
        let len = &b - &a;
        let d = &len / Rational::integer(2 * m as i64);
        let start = &a + &len / Rational::integer(4);
        let xs: Vec<Rational> = (0..=m).map(|l| &start + Rational::integer(l as i64) * &d).collect();
        let mut nodes: Vec<(Rational, Rational)> =
            f.nodes().filter(|(x, _)| **x < a || **x > b).map(|(x, y)| (x.clone(), y.clone())).collect();
        nodes.push((a.clone(), f.eval_in_domain(&a)));
        nodes.push((b.clone(), f.eval_in_domain(&b)));
        for (l, x) in xs.iter().enumerate() {
            nodes.push((x.clone(), if l % 2 == 0 { a.clone() } else { b.clone() }));
        }
        let g = PwaMap::from_nodes(nodes)?;
        let dist = g.sup_distance(f);
        if dist < *epsilon {
            let core = Interval::closed(xs[0].clone(), xs[m].clone());
            let comps: Vec<Interval> = (0..m)
                .map(|l| {
                    let leg = Interval::closed(xs[l].clone(), xs[l + 1].clone());
                    exact_preimage(&g, &leg, &core)
                        .ok_or_else(|| LabError::Internal(format!("leg {l} does not cross the core")))
                })
                .collect::<Result<_>>()?;
            let mut margin = &comps[0].lo - &xs[0];
            for (l, c) in comps.iter().enumerate() {
                for v in [&c.lo - &xs[l], &xs[l + 1] - &c.hi] {
                    if v < margin {
                        margin = v;
                    }
                }
            }
            let eta = margin / Rational::integer(4);
            let intervals: Vec<Interval> = comps.iter().map(|c| c.enlarged(&eta)).collect();
            let hs = verify_horseshoe(&g, &intervals).expect_accepted("planted horseshoe")?;
            let tree = build_atoms(&g, &hs, depth)?;
            verify_atom_tree(&g, &tree).expect_accepted("planted atoms")?;
            let certificate = verify_c0_hyperbolic(&tree, &Rational::new(1, 2), depth).expect_accepted("hyperbolicity")?;
            return Ok(HorseshoePerturbation {
                map: g,
                x0: x0.clone(),
                window: Interval::closed(a, b),
                nodes: xs,
                horseshoe: hs,
                tree,
                certificate,
                sup_distance: dist,
            });
        }
        w = &w / Rational::integer(2);
    }
    Err(LabError::Internal("horseshoe window did not reach the requested distance".into()))
}
