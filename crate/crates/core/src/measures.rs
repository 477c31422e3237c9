//! Atomic probability measures, empirical measures and the truncated
//! weak* metric.
//!
//! The metric is `Σ_{i=1}^{N} 2^{-i} |∫Ψ_i dμ − ∫Ψ_i dν|` over a fixed
//! family of polygonal test functions: `Ψ_1(x) = x`, followed by the hat
//! functions of the dyadic grids `{j/2^L}` for `L = 1, 2, …`, each grid
//! listed left to right. Hats at `0` and `1` are half-hats. The omitted
//! tail is bounded by `2^{-N}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::pwa::PwaMap;
use crate::rational::Rational;

/// Finite atomic probability measure on `[0,1]`: atoms sorted by point,
/// points distinct, weights positive and summing to one.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct AtomicMeasure {
    atoms: Vec<(Rational, Rational)>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<(Rational, Rational)>,
}

impl TryFrom<RawMeasure> for AtomicMeasure {
    type Error = LabError;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicMeasure::new(raw.atoms)
    }
}

impl From<AtomicMeasure> for RawMeasure {
    fn from(m: AtomicMeasure) -> Self {
        RawMeasure { atoms: m.atoms }
    }
}

impl std::fmt::Debug for AtomicMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("μ{")?;
        for (i, (p, w)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}·δ({p})")?;
        }
        f.write_str("}")
    }
}

impl AtomicMeasure {
    /// Merges coincident points, then checks positivity and total mass one.
    pub fn new(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (p, w) in atoms {
            if !p.in_unit_interval() {
                return Err(LabError::Domain(format!("atom at {p} outside [0,1]")));
            }
            if !w.is_positive() {
                return Err(LabError::Domain(format!("non-positive weight {w} at {p}")));
            }
            *merged.entry(p).or_default() += w;
        }
        let total: Rational = merged.values().sum();
        if total != Rational::one() {
            return Err(LabError::Domain(format!("weights sum to {total}, not 1")));
        }
        Ok(AtomicMeasure { atoms: merged.into_iter().collect() })
    }

    pub fn dirac(x: Rational) -> Result<Self> {
        AtomicMeasure::new(vec![(x, Rational::one())])
    }

    /// Equal weights `1/len` on the listed points (repeats accumulate).
    pub fn uniform_on(points: &[Rational]) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::Domain("uniform measure on no points".into()));
        }
        let w = Rational::new(1, points.len() as i64);
        AtomicMeasure::new(points.iter().map(|p| (p.clone(), w.clone())).collect())
    }

    /// `λ a + (1 − λ) b` for `0 ≤ λ ≤ 1`.
    pub fn convex_combination(lambda: &Rational, a: &AtomicMeasure, b: &AtomicMeasure) -> Result<Self> {
        if lambda.is_negative() || *lambda > Rational::one() {
            return Err(LabError::Domain(format!("mixing weight {lambda} outside [0,1]")));
        }
        let mu = Rational::one() - lambda;
        let mut atoms = Vec::new();
        if lambda.is_positive() {
            atoms.extend(a.atoms.iter().map(|(p, w)| (p.clone(), w * lambda)));
        }
        if mu.is_positive() {
            atoms.extend(b.atoms.iter().map(|(p, w)| (p.clone(), w * &mu)));
        }
        AtomicMeasure::new(atoms)
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = &Rational> {
        self.atoms.iter().map(|(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn mass_in(&self, iv: &Interval) -> Rational {
        self.atoms.iter().filter(|(p, _)| iv.contains(p)).map(|(_, w)| w).sum()
    }

    /// `Σ w_k ψ(p_k)` for an arbitrary exact function.
    pub fn integrate_with<F: Fn(&Rational) -> Rational>(&self, psi: F) -> Rational {
        self.atoms.iter().map(|(p, w)| w * psi(p)).sum()
    }

    /// Push-forward `f_* μ`.
    pub fn pushforward(&self, f: &PwaMap) -> AtomicMeasure {
        let atoms = self.atoms.iter().map(|(p, w)| (f.eval_in_domain(p), w.clone())).collect();
        AtomicMeasure::new(atoms).expect("push-forward of a probability measure")
    }
}

/// `∫ ψ dμ`, exact.
pub fn integrate(psi: &PwaMap, mu: &AtomicMeasure) -> Rational {
    mu.integrate_with(|x| psi.eval_in_domain(x))
}

/// `(1/n) Σ_{j<n} δ_{f^j(x)}`.
pub fn birkhoff_empirical(map: &PwaMap, x: &Rational, n: usize) -> Result<AtomicMeasure> {
    if n == 0 {
        return Err(LabError::Domain("empirical measure needs n >= 1".into()));
    }
    let mut y = x.clone();
    map.eval(&y)?;
    let mut orbit = Vec::with_capacity(n);
    for _ in 0..n {
        let next = map.eval_in_domain(&y);
        orbit.push(y);
        y = next;
    }
    AtomicMeasure::uniform_on(&orbit)
}

/// One member of the test-function family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Identity,
    Hat { level: u32, center: Rational },
}

impl TestFunction {
    /// The `i`-th function, `i >= 1`.
    pub fn nth(i: usize) -> TestFunction {
        assert!(i >= 1, "test functions are indexed from 1");
        if i == 1 {
            return TestFunction::Identity;
        }
        let mut rest = i - 2;
        let mut level = 1u32;
        loop {
            let count = (1usize << level) + 1;
            if rest < count {
                let center = Rational::from_big((rest as i64).into(), num_bigint::BigInt::from(1u8) << level as usize);
                return TestFunction::Hat { level, center };
            }
            rest -= count;
            level += 1;
        }
    }

    pub fn first(n: usize) -> Vec<TestFunction> {
        (1..=n).map(TestFunction::nth).collect()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self {
            TestFunction::Identity => x.clone(),
            TestFunction::Hat { level, center } => {
                let h = Rational::pow2_neg(*level);
                let d = (x - center).abs();
                if d >= h {
                    Rational::zero()
                } else {
                    Rational::one() - d / h
                }
            }
        }
    }

    pub fn lipschitz(&self) -> Rational {
        match self {
            TestFunction::Identity => Rational::one(),
            TestFunction::Hat { level, .. } => Rational::pow2_neg(*level).recip(),
        }
    }

    pub fn to_pwa(&self) -> PwaMap {
        match self {
            TestFunction::Identity => PwaMap::identity(),
            TestFunction::Hat { level, center } => {
                let h = Rational::pow2_neg(*level);
                let mut xs = vec![Rational::zero(), center - &h, center.clone(), center + &h, Rational::one()];
                xs.retain(|x| x.in_unit_interval());
                let nodes = xs.into_iter().map(|x| (x.clone(), self.eval(&x))).collect();
                PwaMap::from_nodes(nodes).expect("hat nodes are valid")
            }
        }
    }
}

/// Truncated weak* distance together with the bound on the omitted tail:
/// the true distance lies in `[truncated_value, truncated_value + tail_bound]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakStarDistance {
    pub truncated_value: Rational,
    pub tail_bound: Rational,
    pub terms: usize,
}

impl WeakStarDistance {
    pub fn upper_bound(&self) -> Rational {
        &self.truncated_value + &self.tail_bound
    }
}

pub fn weakstar_distance(mu: &AtomicMeasure, nu: &AtomicMeasure, n_terms: usize) -> Result<WeakStarDistance> {
    if n_terms == 0 {
        return Err(LabError::Domain("truncation level must be >= 1".into()));
    }
    let mut total = Rational::zero();
    for (i, psi) in TestFunction::first(n_terms).iter().enumerate() {
        let diff = mu.integrate_with(|x| psi.eval(x)) - nu.integrate_with(|x| psi.eval(x));
        total += diff.abs() * Rational::pow2_neg(i as u32 + 1);
    }
    Ok(WeakStarDistance { truncated_value: total, tail_bound: Rational::pow2_neg(n_terms as u32), terms: n_terms })
}

/// Constants making measures that nearly agree on short intervals close in the metric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproximationParams {
    pub n: usize,
    pub delta: Rational,
    pub q: u64,
}

/// `n` minimal with `2^{-n} < ε/2`; `δ = ε / (4 max Lip Ψ_{1..n})`;
/// `q` minimal with `1/q < min(δ, ε/4)`.
pub fn approximation_parameters(epsilon: &Rational) -> Result<ApproximationParams> {
    if !epsilon.is_positive() {
        return Err(LabError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let half = epsilon / Rational::integer(2);
    let mut n = 1usize;
    while Rational::pow2_neg(n as u32) >= half {
        n += 1;
    }
    let lip = TestFunction::first(n).iter().map(TestFunction::lipschitz).max().unwrap();
    let delta = epsilon / (Rational::integer(4) * lip);
    let quarter = epsilon / Rational::integer(4);
    let q = Rational::min_of(&delta, &quarter).smallest_recip_below();
    Ok(ApproximationParams { n, delta, q })
}
