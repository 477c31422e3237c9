use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};
use srblab::cascade::{build_cascade_map, default_geometry, itinerary, verify_cascade, CascadeAtoms};
use srblab::horseshoe::{build_atoms, verify_atom_tree, verify_c0_hyperbolic, verify_horseshoe, Horseshoe};
use srblab::measures::{birkhoff_empirical, weakstar_distance};
use srblab::pseudo_physical::basin_estimate;
use srblab::pwa::FixedKind;
use srblab::qr_covering::{construct_qr_covered, verify_qr_covering};
use srblab::shadowing::{shadow_periodic, verify_pseudo_orbit, PseudoOrbit, DEFAULT_TUBE_CAP};
use srblab::shrinking::{
    perturb_to_fixed_cluster, perturb_to_shrinking_cover, recheck, verify_cover, verify_fixed_cluster, ShrinkingCertificate,
};
use srblab::symbolic::{mixing_product_check, partition_entropy, Cylinder};
use srblab::{AtomicMeasure, Interval, PwaMap, Rational, Verdict};

use crate::io::{display_decimal, load, load_value, map_source, piece_cap, rational, strings, usage, CmdResult, Outcome};

fn refusal<T>(v: &Verdict<T>) -> Option<String> {
    v.refusal().map(str::to_owned)
}

pub fn map_eval(map: &str, x: &str, n: usize) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let x = rational("x", x)?;
    let mut orbit = vec![x.clone()];
    for _ in 0..n {
        let next = f.eval(orbit.last().unwrap()).map_err(|e| usage("x", e))?;
        orbit.push(next);
    }
    Ok(Outcome::ok(json!({"x": x.to_string(), "n": n, "value": orbit[n].to_string(), "orbit": strings(&orbit)})))
}

pub fn map_iterate(map: &str, n: usize) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let g = f.iterate(n, piece_cap()?).map_err(|e| usage("n", e))?;
    Ok(Outcome::ok(json!({"n": n, "pieces": g.piece_count(), "map": g})))
}

pub fn map_fixed_points(map: &str, r: usize) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let comps = f.fixed_points_of_iterate(r, piece_cap()?).map_err(|e| usage("r", e))?;
    let points = comps.iter().filter(|c| c.kind == FixedKind::Point).count();
    Ok(Outcome::ok(json!({"r": r, "components": comps, "isolated_points": points, "segments": comps.len() - points})))
}

pub fn map_distance(a: &str, b: &str) -> CmdResult<Outcome> {
    let (fa, fb) = (map_source("a", a)?, map_source("b", b)?);
    Ok(Outcome::ok(json!({"sup_distance": fa.sup_distance(&fb).to_string()})))
}

/// Distances `d(e_k, target)` for `k = 1..=n`, target defaulting to `e_n`.
pub fn measure_birkhoff(map: &str, x: &str, n: usize, n_terms: usize, target: Option<&Path>) -> CmdResult<Outcome> {
    if n == 0 {
        return Err(usage("n", "must be >= 1"));
    }
    let f = map_source("map", map)?;
    let x = rational("x", x)?;
    let last = birkhoff_empirical(&f, &x, n).map_err(|e| usage("x", e))?;
    let target: AtomicMeasure = match target {
        Some(p) => load("target", p)?,
        None => last.clone(),
    };
    let mut series = Vec::with_capacity(n);
    let mut csv = String::from("n,distance,distance_display_only\n");
    for k in 1..=n {
        let e = birkhoff_empirical(&f, &x, k).map_err(|e| usage("x", e))?;
        let d = weakstar_distance(&e, &target, n_terms).map_err(|e| usage("n-terms", e))?;
        csv.push_str(&format!("{k},{},{}\n", d.truncated_value, display_decimal(&d.truncated_value)));
        series.push(json!({"n": k, "distance": d.truncated_value.to_string()}));
    }
    let result = json!({"empirical": last, "target": target, "tail_bound": Rational::pow2_neg(n_terms as u32).to_string(), "series": series});
    Ok(Outcome { result, refusal: None, csv: Some(csv) })
}

pub fn measure_dist(a: &Path, b: &Path, n_terms: usize) -> CmdResult<Outcome> {
    let (mu, nu): (AtomicMeasure, AtomicMeasure) = (load("a", a)?, load("b", b)?);
    let d = weakstar_distance(&mu, &nu, n_terms).map_err(|e| usage("n-terms", e))?;
    Ok(Outcome::ok(json!({"distance": d, "upper_bound": d.upper_bound().to_string()})))
}

fn cert_dump(map: &PwaMap, c: &ShrinkingCertificate) -> Value {
    json!({
        "interval": c.interval,
        "period": c.period,
        "images": c.images,
        "preperiod": c.preperiod,
        "verified": recheck(map, c).is_accepted(),
    })
}

pub fn perturb_shrinking(map: &str, epsilon: &str, q: u64, k: u64) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let eps = rational("epsilon", epsilon)?;
    let cover = perturb_to_shrinking_cover(&f, &eps, q, k).map_err(|e| usage("epsilon", e))?;
    let v = verify_cover(&cover);
    let certs: Vec<Value> = cover.intervals.iter().map(|c| cert_dump(&cover.map, c)).collect();
    Ok(Outcome::refused_if(json!({"cover": cover, "certificates": certs}), refusal(&v)))
}

pub fn perturb_fixed_cluster(map: &str, q: u64, epsilon: &str) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let eps = rational("epsilon", epsilon)?;
    let cl = perturb_to_fixed_cluster(&f, q, &eps).map_err(|e| usage("epsilon", e))?;
    let v = verify_fixed_cluster(&cl);
    Ok(Outcome::refused_if(serde_json::to_value(&cl)?, refusal(&v)))
}

pub fn perturb_horseshoe(map: &str, x0: Option<&str>, epsilon: &str, m: usize, q: u64, depth: usize) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let eps = rational("epsilon", epsilon)?;
    let x0 = match x0 {
        Some(s) => rational("x0", s)?,
        None => {
            let comps = f.fixed_points_of_iterate(1, piece_cap()?).map_err(|e| usage("map", e))?;
            let c = comps.first().ok_or_else(|| usage("x0", "map has no fixed point"))?;
            match c.kind {
                FixedKind::Point => c.interval.lo.clone(),
                FixedKind::Segment => c.interval.midpoint(),
            }
        }
    };
    let hp = srblab::horseshoe::build_horseshoe_perturbation(&f, &x0, &eps, m, q, depth).map_err(|e| usage("x0", e))?;
    let v = verify_horseshoe(&hp.map, &hp.horseshoe.intervals);
    Ok(Outcome::refused_if(serde_json::to_value(&hp)?, refusal(&v)))
}

pub fn perturb_qr_cover(map: &str, q: u64, r: usize, epsilon: &str) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let eps = rational("epsilon", epsilon)?;
    let cap = piece_cap()?;
    let qc = construct_qr_covered(&f, q, r, &eps, cap).map_err(|e| usage("epsilon", e))?;
    let v = verify_qr_covering(&qc.map, &qc.cover, cap).map_err(|e| usage("r", e))?;
    let certs: Vec<Value> = qc.cover.entries.iter().map(|e| cert_dump(&qc.map, &e.cert)).collect();
    Ok(Outcome::refused_if(json!({"construction": qc, "certificates": certs}), refusal(&v)))
}

/// Horseshoe intervals from a plain array, a `{"intervals": …}` object or a
/// horseshoe perturbation artifact; the map comes from `--map` or the artifact.
fn horseshoe_input(input: &Path, map: Option<&str>) -> CmdResult<(PwaMap, Vec<Interval>)> {
    let v = load_value("input", input)?;
    let ivs = v.get("horseshoe").and_then(|h| h.get("intervals")).or_else(|| v.get("intervals")).unwrap_or(&v);
    let intervals: Vec<Interval> = serde_json::from_value(ivs.clone()).map_err(|e| usage("input", e))?;
    let f = match (map, v.get("map")) {
        (Some(m), _) => map_source("map", m)?,
        (None, Some(m)) => serde_json::from_value(m.clone()).map_err(|e| usage("input", e))?,
        (None, None) => return Err(usage("map", "input carries no map; pass --map")),
    };
    Ok((f, intervals))
}

fn verified_horseshoe(input: &Path, map: Option<&str>) -> CmdResult<(PwaMap, Result<Horseshoe, String>)> {
    let (f, ivs) = horseshoe_input(input, map)?;
    let hs = match verify_horseshoe(&f, &ivs) {
        Verdict::Accepted(h) => Ok(h),
        Verdict::Refused(r) => Err(r),
    };
    Ok((f, hs))
}

pub fn horseshoe_verify(input: &Path, map: Option<&str>) -> CmdResult<Outcome> {
    let (_, hs) = verified_horseshoe(input, map)?;
    Ok(match hs {
        Ok(h) => Outcome::ok(json!({"m": h.m, "intervals": h.intervals})),
        Err(r) => Outcome::refused_if(Value::Null, Some(r)),
    })
}

fn word_key(word: &[usize]) -> String {
    word.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

pub fn horseshoe_atoms(input: &Path, map: Option<&str>, depth: usize) -> CmdResult<Outcome> {
    let (f, hs) = verified_horseshoe(input, map)?;
    let hs = match hs {
        Ok(h) => h,
        Err(r) => return Ok(Outcome::refused_if(Value::Null, Some(r))),
    };
    let tree = build_atoms(&f, &hs, depth).map_err(|e| usage("depth", e))?;
    let atoms: BTreeMap<String, &Interval> =
        tree.generations.iter().flatten().map(|a| (word_key(&a.word), &a.interval)).collect();
    let v = verify_atom_tree(&f, &tree);
    let max_lengths: Vec<String> = (1..=depth).map(|g| tree.max_length(g).to_string()).collect();
    Ok(Outcome::refused_if(json!({"m": tree.m, "depth": depth, "atoms": atoms, "max_lengths": max_lengths}), refusal(&v)))
}

pub fn horseshoe_hyperbolic(input: &Path, map: Option<&str>, depth: usize, lambda: &str) -> CmdResult<Outcome> {
    let lambda = rational("lambda", lambda)?;
    let (f, hs) = verified_horseshoe(input, map)?;
    let hs = match hs {
        Ok(h) => h,
        Err(r) => return Ok(Outcome::refused_if(Value::Null, Some(r))),
    };
    let tree = build_atoms(&f, &hs, depth).map_err(|e| usage("depth", e))?;
    Ok(match verify_c0_hyperbolic(&tree, &lambda, depth) {
        Verdict::Accepted(c) => Outcome::ok(serde_json::to_value(c)?),
        Verdict::Refused(r) => Outcome::refused_if(Value::Null, Some(r)),
    })
}

pub fn cascade_build(depth: usize, j: Option<Interval>, i: Option<Interval>, iprime: Option<Interval>) -> CmdResult<Outcome> {
    let (dj, di, dip) = default_geometry();
    let ca = build_cascade_map(&j.unwrap_or(dj), &i.unwrap_or(di), &iprime.unwrap_or(dip), depth).map_err(|e| usage("depth", e))?;
    let report = verify_cascade(&ca);
    let mut result = serde_json::to_value(&ca)?;
    result["atom_counts"] = json!(report.atom_counts);
    Ok(Outcome::refused_if(result, report.violation))
}

pub fn cascade_verify(path: &Path) -> CmdResult<Outcome> {
    let ca: CascadeAtoms = load("cascade", path)?;
    let report = verify_cascade(&ca);
    let violation = if report.ok { None } else { Some(report.violation.clone().unwrap_or_else(|| "verification failed".into())) };
    Ok(Outcome::refused_if(serde_json::to_value(&report)?, violation))
}

pub fn cascade_itinerary(path: &Path, x: &str, n: usize) -> CmdResult<Outcome> {
    let ca: CascadeAtoms = load("cascade", path)?;
    let x = rational("x", x)?;
    Ok(match itinerary(&ca, &x, n) {
        Verdict::Accepted(t) => Outcome::ok(json!({"x": x.to_string(), "n": n, "itinerary": t, "display": t.to_string()})),
        Verdict::Refused(r) => Outcome::refused_if(json!({"x": x.to_string(), "n": n}), Some(r)),
    })
}

pub fn symbolic_entropy(k: u32, n: u32, oracle: bool) -> CmdResult<Outcome> {
    let v = partition_entropy(k, n, oracle).map_err(|e| usage("k", e))?;
    Ok(match v {
        Verdict::Accepted(r) => {
            let refused = (r.oracle_confirmed == Some(false)).then(|| "enumeration disagrees with the closed form".to_owned());
            Outcome::refused_if(serde_json::to_value(r)?, refused)
        }
        Verdict::Refused(r) => Outcome::refused_if(Value::Null, Some(r)),
    })
}

/// `"i,j=b;i,j=b"` with 1-based positions.
pub fn cylinder(field: &str, s: &str) -> CmdResult<Cylinder> {
    let mut pairs = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || usage(field, format!("expected \"i,j=b\", got {part:?}"));
        let (pos, bit) = part.split_once('=').ok_or_else(bad)?;
        let (i, j) = pos.split_once(',').ok_or_else(bad)?;
        let i: u32 = i.trim().parse().map_err(|_| bad())?;
        let j: u32 = j.trim().parse().map_err(|_| bad())?;
        let b: u8 = bit.trim().parse().map_err(|_| bad())?;
        pairs.push(((i, j), b));
    }
    Cylinder::new(pairs).map_err(|e| usage(field, e))
}

fn cylinder_json(c: &Cylinder) -> Value {
    c.constraints().iter().map(|(&(i, j), &b)| json!({"i": i, "j": j, "bit": b})).collect()
}

pub fn symbolic_mixing(h: &str, k: &str, n: u32) -> CmdResult<Outcome> {
    let (ch, ck) = (cylinder("h", h)?, cylinder("k", k)?);
    let r = mixing_product_check(&ch, &ck, n);
    let refused = (n >= r.n0 && !r.holds).then(|| format!("product identity fails at n = {n} >= n0 = {}", r.n0));
    Ok(Outcome::refused_if(json!({"h": cylinder_json(&ch), "k": cylinder_json(&ck), "n": n, "report": r}), refused))
}

pub fn shadow(map: &str, po: &Path, epsilon: &str, tube_cap: Option<usize>) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let po: PseudoOrbit = load("pseudo-orbit", po)?;
    let eps = rational("epsilon", epsilon)?;
    if !verify_pseudo_orbit(&f, &po) {
        return Ok(Outcome::refused_if(Value::Null, Some(format!("input is not a {}-pseudo-orbit", po.delta))));
    }
    let v = shadow_periodic(&f, &po, &eps, tube_cap.unwrap_or(DEFAULT_TUBE_CAP), piece_cap()?).map_err(|e| usage("pseudo-orbit", e))?;
    Ok(match v {
        Verdict::Accepted(s) => Outcome::ok(serde_json::to_value(s)?),
        Verdict::Refused(r) => Outcome::refused_if(Value::Null, Some(r)),
    })
}

pub fn basin(map: &str, measure: &Path, epsilon: &str, grid: usize, horizon: usize, n_terms: usize) -> CmdResult<Outcome> {
    let f = map_source("map", map)?;
    let mu: AtomicMeasure = load("measure", measure)?;
    let eps = rational("epsilon", epsilon)?;
    let est = basin_estimate(&f, &mu, &eps, grid, horizon, n_terms).map_err(|e| usage("grid", e))?;
    Ok(Outcome::ok(serde_json::to_value(est)?))
}
