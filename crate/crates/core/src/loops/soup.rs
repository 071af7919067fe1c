use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use serde_json::json;

use super::{enumerate_unrooted_loops, loop_measure_series, spectral_radius_bound, UnrootedLoop};
use crate::error::{Error, Result};
use crate::lattice::{step_matrix, GreenMatrix, LatticeDomain, LatticePoint, LatticeWalk};
use crate::lerw::SelfAvoidingExcursion;

/// Default maximal loop length kept in a soup.
pub const DEFAULT_L_MAX: usize = 16;

const DEFAULT_ENUMERATION_BUDGET: usize = 200_000_000;

/// Every unrooted loop of length at most `l_max` with its weight, ready to sample.
#[derive(Clone, Debug)]
pub struct LoopCatalog {
    domain: LatticeDomain,
    l_max: usize,
    loops: Vec<UnrootedLoop>,
    weights: Vec<f64>,
    total: f64,
    tail_bound: f64,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl LoopCatalog {
    pub fn new(domain: &LatticeDomain, l_max: usize) -> Result<Self> {
        Self::with_budget(domain, l_max, DEFAULT_ENUMERATION_BUDGET)
    }

    pub fn with_budget(domain: &LatticeDomain, l_max: usize, budget: usize) -> Result<Self> {
        let loops = enumerate_unrooted_loops(domain, l_max, budget)?;
        let weights: Vec<f64> = loops.iter().map(|l| l.weight::<f64>()).collect();
        let total = weights.iter().sum();
        let tail_bound = loop_measure_series::<f64>(domain, l_max)?.tail_bound;
        let alias = if weights.is_empty() {
            None
        } else {
            Some(WeightedAliasIndex::new(weights.clone()).map_err(|e| Error::Convergence(e.to_string()))?)
        };
        Ok(Self {
            domain: domain.clone(),
            l_max,
            loops,
            weights,
            total,
            tail_bound,
            alias,
        })
    }

    pub fn loops(&self) -> &[UnrootedLoop] {
        &self.loops
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mass of the loops in the catalog.
    pub fn truncated_total(&self) -> f64 {
        self.total
    }

    /// Certified bound on the mass of loops longer than `l_max`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    /// A soup of intensity `t`: a Poisson number of independent catalog draws
    /// with uniform times in `[0, t]`.
    pub fn sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> LoopSoupSample {
        let mut entries = Vec::new();
        if let (Some(alias), true) = (&self.alias, t > 0.0) {
            let count = Poisson::new(self.total * t).expect("positive rate").sample(rng) as usize;
            entries.reserve(count);
            for _ in 0..count {
                let loop_ = self.loops[alias.sample(rng)].clone();
                let time = rng.random::<f64>() * t;
                entries.push(SoupEntry { time, loop_ });
            }
            entries.sort_by(|a, b| a.time.total_cmp(&b.time));
        }
        LoopSoupSample {
            entries,
            intensity: t,
            l_max: self.l_max,
            tail_mass: self.tail_bound * t,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoupEntry {
    pub time: f64,
    pub loop_: UnrootedLoop,
}

/// A realisation of the loop soup, sorted by time.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSoupSample {
    pub entries: Vec<SoupEntry>,
    pub intensity: f64,
    pub l_max: usize,
    /// Bound on the expected number of omitted loops longer than `l_max`.
    pub tail_mass: f64,
}

impl LoopSoupSample {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One JSON object per loop: `{time, points, multiplicity}`, where
    /// `multiplicity` is the number of distinct rooted representatives.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let points: Vec<[i64; 2]> = e.loop_.representative().points().iter().map(|p| [p.x, p.y]).collect();
            let line = json!({"time": e.time, "points": points, "multiplicity": e.loop_.rotations()});
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn sample_loop_soup<R: Rng + ?Sized>(
    domain: &LatticeDomain,
    t: f64,
    l_max: usize,
    rng: &mut R,
) -> Result<LoopSoupSample> {
    if t < 0.0 {
        return Err(Error::OutOfRange {
            what: "intensity",
            value: t,
            range: "[0, inf)",
        });
    }
    Ok(LoopCatalog::new(domain, l_max)?.sample(t, rng))
}

/// Grafts soup loops onto `eta`: each loop meeting `eta` is rooted at the first
/// point of `eta` it visits (a uniformly chosen visit when there are several)
/// and inserted there, in order of soup time.
pub fn attach_loops<R: Rng + ?Sized>(eta: &SelfAvoidingExcursion, soup: &LoopSoupSample, rng: &mut R) -> LatticeWalk {
    let pts = eta.points();
    let position: HashMap<LatticePoint, usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut grafts: Vec<Vec<LatticePoint>> = vec![Vec::new(); pts.len()];
    let mut visits = Vec::new();
    for entry in &soup.entries {
        let cycle = entry.loop_.cycle();
        let Some(first) = cycle.iter().filter_map(|p| position.get(p).copied()).min() else {
            continue;
        };
        visits.clear();
        visits.extend((0..cycle.len()).filter(|&k| cycle[k] == pts[first]));
        let k = visits[rng.random_range(0..visits.len())];
        let rooted = entry.loop_.rooted_at(k);
        grafts[first].extend_from_slice(&rooted.points()[1..]);
    }
    let mut out = Vec::with_capacity(pts.len() + grafts.iter().map(Vec::len).sum::<usize>());
    for (i, &p) in pts.iter().enumerate() {
        out.push(p);
        out.extend_from_slice(&grafts[i]);
    }
    LatticeWalk::from_trusted(out)
}

/// Rooted loops at `z` in `A` up to length `l_max`, weighted by
/// `4^{-|omega|} / (number of visits to z)`.
#[derive(Clone, Debug)]
pub struct RootedLoopCatalog {
    root: LatticePoint,
    loops: Vec<Vec<LatticePoint>>,
    weights: Vec<f64>,
    total: f64,
    tail_bound: f64,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl RootedLoopCatalog {
    pub fn new(domain: &LatticeDomain, root: LatticePoint, l_max: usize) -> Result<Self> {
        domain.require_interior(root)?;
        let mut loops = Vec::new();
        let mut path = vec![root];
        let mut explored = 0usize;
        rooted_dfs(domain, root, l_max, &mut explored, &mut path, &mut loops)?;
        let weights: Vec<f64> = loops
            .iter()
            .map(|l: &Vec<LatticePoint>| {
                let n = l.len() - 1;
                let visits = l[..n].iter().filter(|&&p| p == root).count();
                0.25f64.powi(n as i32) / visits as f64
            })
            .collect();
        let total = weights.iter().sum();
        let rho = spectral_radius_bound(&step_matrix::<f64>(domain));
        let tail_bound = rho.powi(l_max as i32 + 1) / (1.0 - rho);
        let alias = if weights.is_empty() {
            None
        } else {
            Some(WeightedAliasIndex::new(weights.clone()).map_err(|e| Error::Convergence(e.to_string()))?)
        };
        Ok(Self {
            root,
            loops,
            weights,
            total,
            tail_bound,
            alias,
        })
    }

    pub fn loops(&self) -> &[Vec<LatticePoint>] {
        &self.loops
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Draws the chronological concatenation `l_1` of a unit-intensity
    /// Poisson process of rooted loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<LatticePoint> {
        let mut out = vec![self.root];
        let Some(alias) = &self.alias else {
            return out;
        };
        let count = Poisson::new(self.total).expect("positive rate").sample(rng) as usize;
        let mut draws: Vec<(f64, usize)> = (0..count).map(|_| (rng.random::<f64>(), alias.sample(rng))).collect();
        draws.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, idx) in draws {
            out.extend_from_slice(&self.loops[idx][1..]);
        }
        out
    }
}

fn rooted_dfs(
    domain: &LatticeDomain,
    root: LatticePoint,
    l_max: usize,
    explored: &mut usize,
    path: &mut Vec<LatticePoint>,
    out: &mut Vec<Vec<LatticePoint>>,
) -> Result<()> {
    *explored += 1;
    if *explored > DEFAULT_ENUMERATION_BUDGET {
        return Err(Error::Budget {
            what: "rooted loop enumeration",
            limit: DEFAULT_ENUMERATION_BUDGET,
        });
    }
    let here = *path.last().expect("nonempty");
    let steps = path.len() - 1;
    for next in domain.interior_neighbors(here) {
        if (steps + 1) as i64 + next.manhattan(root) > l_max as i64 {
            continue;
        }
        path.push(next);
        if next == root {
            out.push(path.clone());
        }
        rooted_dfs(domain, root, l_max, explored, path, out)?;
        path.pop();
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopLawRow {
    pub loop_id: String,
    pub length: usize,
    pub exact_prob: f64,
    pub empirical_prob: f64,
    pub count: u64,
}

/// Empirical law of `l_1` against the exact law `q_A 4^{-|omega|}`.
#[derive(Clone, Debug)]
pub struct LoopLawTable {
    pub rows: Vec<LoopLawRow>,
    pub n_samples: usize,
    pub escape_probability: f64,
    /// Bound on the rooted-loop mass omitted by truncation.
    pub tail_bound: f64,
    /// Exact probability of loops not listed in `rows`.
    pub unlisted_exact_mass: f64,
}

impl LoopLawTable {
    pub fn total_variation(&self) -> f64 {
        let listed: f64 = self.rows.iter().map(|r| (r.exact_prob - r.empirical_prob).abs()).sum();
        0.5 * (listed + self.unlisted_exact_mass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("loop_id,exact_prob,empirical_prob,count\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e},{}", r.loop_id, r.exact_prob, r.empirical_prob, r.count);
        }
        out
    }
}

fn walk_id(points: &[LatticePoint]) -> String {
    points.iter().map(|p| format!("{}:{}", p.x, p.y)).collect::<Vec<_>>().join(" ")
}

/// Samples `l_1` from the rooted loop process at `z` and tabulates its law.
pub fn concatenated_loop_law<R: Rng + ?Sized>(
    domain: &LatticeDomain,
    z: LatticePoint,
    n_samples: usize,
    l_max: usize,
    rng: &mut R,
) -> Result<LoopLawTable> {
    let catalog = RootedLoopCatalog::new(domain, z, l_max)?;
    let q = 1.0 / GreenMatrix::<f64>::new(domain)?.get(z, z)?;
    let mut counts: HashMap<Vec<LatticePoint>, u64> = HashMap::new();
    for _ in 0..n_samples {
        *counts.entry(catalog.sample(rng)).or_insert(0) += 1;
    }
    let mut keys: Vec<Vec<LatticePoint>> = std::iter::once(vec![z]).chain(catalog.loops().iter().cloned()).collect();
    for k in counts.keys() {
        if k.len() - 1 > l_max {
            keys.push(k.clone());
        }
    }
    keys.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let rows: Vec<LoopLawRow> = keys
        .into_iter()
        .map(|k| {
            let length = k.len() - 1;
            let count = counts.get(&k).copied().unwrap_or(0);
            LoopLawRow {
                loop_id: walk_id(&k),
                length,
                exact_prob: q * 0.25f64.powi(length as i32),
                empirical_prob: count as f64 / n_samples.max(1) as f64,
                count,
            }
        })
        .collect();
    let listed: f64 = rows.iter().map(|r| r.exact_prob).sum();
    Ok(LoopLawTable {
        rows,
        n_samples,
        escape_probability: q,
        tail_bound: catalog.tail_bound(),
        unlisted_exact_mass: (1.0 - listed).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lerw::loop_erase;
    use crate::stats::rng_from_seed;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn pair() -> LatticeDomain {
        LatticeDomain::new([p(0, 0), p(1, 0)])
    }

    #[test]
    fn zero_intensity_gives_an_empty_soup() {
        let mut rng = rng_from_seed(1);
        assert!(sample_loop_soup(&pair(), 0.0, 16, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn pair_catalog_weights() {
        let c = LoopCatalog::new(&pair(), 16).unwrap();
        assert_eq!(c.loops()[0].len(), 2);
        assert!((c.weights()[0] - 1.0 / 16.0).abs() < 1e-16);
        assert!(c.tail_bound() < 1e-6);
        let exact = -(15.0f64 / 16.0).ln();
        assert!((exact - c.truncated_total()).abs() <= c.tail_bound());
    }

    #[test]
    fn rooted_catalog_mass_is_log_green() {
        let a = LatticeDomain::rectangle(0, 1, 0, 1);
        let c = RootedLoopCatalog::new(&a, p(0, 0), 14).unwrap();
        let g: f64 = GreenMatrix::new(&a).unwrap().get(p(0, 0), p(0, 0)).unwrap();
        assert!((c.total() - g.ln()).abs() <= c.tail_bound());
    }

    #[test]
    fn attach_then_erase_returns_the_path() {
        let a = LatticeDomain::rectangle(0, 2, 0, 1);
        let eta = SelfAvoidingExcursion::new(
            LatticeWalk::new(vec![p(-1, 0), p(0, 0), p(1, 0), p(1, 1), p(2, 1), p(3, 1)]).unwrap(),
            &a,
        )
        .unwrap();
        let catalog = LoopCatalog::new(&a, 10).unwrap();
        let mut rng = rng_from_seed(9);
        for _ in 0..300 {
            let soup = catalog.sample(1.0, &mut rng);
            let walk = attach_loops(&eta, &soup, &mut rng);
            assert!(walk.is_excursion_in(&a));
            assert_eq!(loop_erase(&walk).points(), eta.points());
        }
    }

    #[test]
    fn disjoint_loops_are_ignored() {
        let a = LatticeDomain::rectangle(0, 4, 0, 0);
        let eta = SelfAvoidingExcursion::new(LatticeWalk::new(vec![p(0, 1), p(0, 0), p(0, -1)]).unwrap(), &a).unwrap();
        let far = UnrootedLoop::from_cycle(&[p(3, 0), p(4, 0)]);
        let soup = LoopSoupSample {
            entries: vec![SoupEntry { time: 0.5, loop_: far }],
            intensity: 1.0,
            l_max: 2,
            tail_mass: 0.0,
        };
        let mut rng = rng_from_seed(2);
        assert_eq!(attach_loops(&eta, &soup, &mut rng).points(), eta.points());
    }

    #[test]
    fn json_lines_have_one_record_per_loop() {
        let mut rng = rng_from_seed(4);
        let soup = sample_loop_soup(&LatticeDomain::rectangle(0, 1, 0, 1), 3.0, 6, &mut rng).unwrap();
        let text = soup.to_json_lines();
        assert_eq!(text.lines().count(), soup.len());
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["time"].as_f64().unwrap() <= 3.0);
            assert!(v["multiplicity"].as_u64().unwrap() >= 1);
        }
    }

    #[test]
    fn loop_law_table_for_the_pair() {
        let mut rng = rng_from_seed(5);
        let t = concatenated_loop_law(&pair(), p(0, 0), 20_000, 16, &mut rng).unwrap();
        assert_eq!(t.rows[0].loop_id, "0:0");
        assert!((t.rows[0].exact_prob - 15.0 / 16.0).abs() < 1e-15);
        assert!((t.rows[1].exact_prob - 15.0 / 256.0).abs() < 1e-15);
        let sum: f64 = t.rows.iter().map(|r| r.exact_prob).sum();
        assert!((sum + t.unlisted_exact_mass - 1.0).abs() < 1e-12);
        assert!(t.total_variation() < 0.02);
        assert!(t.to_csv().starts_with("loop_id,exact_prob,empirical_prob,count\n"));
    }
}
