//! k-identifiability experiments: for every congested link set of size k,
//! simulate measurements, recover the support, and count exact recoveries.
//!
//! Links whose column is zero in the matrix being solved (a link on no path,
//! or a link cancelled by the reference row) cannot be observed. They are
//! excluded from the enumeration and listed in the report as invisible.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinations::{binomial, colex_rank, colex_unrank, Colex};
use crate::error::{Result, TomoError};
use crate::format::sig5;
use crate::matrix::{build_differential_matrix, build_routing_matrix, IntMatrix, RoutingMatrix};
use crate::measurement::{
    apply_clock_offset, differential_measurements, generate_link_delays_with, path_delays,
    DelayParams, GENERATOR_NAME,
};
use crate::scalar::Real;
use crate::solver::{solve_l1_l2, SolveOptions};
use crate::topology::PathSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Solve `z = A x` directly; only valid with synchronised clocks.
    Original,
    /// Solve `z^(r) = A^(r) x`.
    Differential,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Original => "original",
            Scheme::Differential => "differential",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = TomoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Scheme::Original),
            "differential" => Ok(Scheme::Differential),
            other => Err(TomoError::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Reference row for the differential scheme (0-based), or every row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceChoice {
    Row(usize),
    Sweep,
}

/// How the clock offset is chosen for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode<T> {
    /// Uniform in `[-bound, bound]`, redrawn while `|delta| < min_abs`.
    Random { bound: T, min_abs: T },
    Fixed(T),
}

impl<T: Real> DeltaMode<T> {
    pub fn default_random() -> Self {
        DeltaMode::Random {
            bound: T::of(1e6),
            min_abs: T::one(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            DeltaMode::Fixed(v) => v,
            DeltaMode::Random { bound, min_abs } => loop {
                let u: f64 = rng.gen_range(-1.0..=1.0);
                let d = bound * T::of(u);
                if d.abs() >= min_abs {
                    break d;
                }
            },
        }
    }

    /// Short label for the results CSV.
    pub fn label(&self) -> String {
        match *self {
            DeltaMode::Fixed(v) => format!("fixed={v}"),
            DeltaMode::Random { bound, min_abs } => format!("random[{min_abs};{bound}]"),
        }
    }
}

/// Experiment settings that do not depend on the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig<T> {
    pub scheme: Scheme,
    pub reference: ReferenceChoice,
    pub k_values: Vec<usize>,
    /// Delay model; its seed is replaced per trial by one derived from `seed`.
    pub delay: DelayParams<T>,
    pub solver: SolveOptions<T>,
    pub delta: DeltaMode<T>,
    /// Largest C(J,k) enumerated exhaustively.
    pub enumeration_cap: u128,
    /// Number of sets drawn when C(J,k) exceeds the cap; `None` makes an
    /// oversized enumeration an error.
    pub sample_size: Option<u64>,
    /// Independent delay draws per congested set.
    pub repeats: u32,
    pub seed: u64,
}

impl<T: Real> ExperimentConfig<T> {
    pub fn new(scheme: Scheme, reference: ReferenceChoice, k_values: Vec<usize>, seed: u64) -> Self {
        ExperimentConfig {
            scheme,
            reference,
            k_values,
            delay: DelayParams::default(),
            solver: SolveOptions::default(),
            delta: DeltaMode::default_random(),
            enumeration_cap: 100_000,
            sample_size: None,
            repeats: 1,
            seed,
        }
    }

    pub fn validate(&self, num_links: usize, num_paths: usize) -> Result<()> {
        if self.k_values.is_empty() {
            return Err(TomoError::InvalidParameter("no k values given".into()));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0 || k > num_links) {
            return Err(TomoError::InvalidParameter(format!(
                "k = {k} outside 1..={num_links}"
            )));
        }
        if self.scheme == Scheme::Differential && num_paths < 2 {
            return Err(TomoError::InsufficientPaths { found: num_paths });
        }
        if let ReferenceChoice::Row(r) = self.reference {
            if self.scheme == Scheme::Differential && r >= num_paths {
                return Err(TomoError::ReferenceOutOfRange {
                    reference: r + 1,
                    rows: num_paths,
                });
            }
        }
        if self.repeats == 0 {
            return Err(TomoError::InvalidParameter("repeats must be at least 1".into()));
        }
        self.delay.validate()?;
        self.solver.validate()
    }
}

impl<T: Real + Serialize> ExperimentConfig<T> {
    /// SHA-256 over the serialised config and `context` (e.g. the topology
    /// and paths text), hex encoded.
    pub fn fingerprint(&self, context: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(self).expect("config serialises"));
        hasher.update(context.as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    Exhaustive,
    Sampled { seed: u64, size: u64 },
}

impl std::fmt::Display for Enumeration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Enumeration::Exhaustive => f.write_str("exhaustive"),
            Enumeration::Sampled { seed, size } => write!(f, "sampled(seed={seed};size={size})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KRatio {
    pub k: usize,
    pub identified: u64,
    pub total: u64,
    /// `identified / total`; 0 when no set was evaluated.
    pub ratio: f64,
    pub enumeration: Enumeration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub scheme: Scheme,
    /// 0-based reference row (differential scheme only).
    pub reference: Option<usize>,
    /// Hop count of the reference path.
    pub reference_l1: Option<usize>,
    /// Rows of the original routing matrix.
    pub paths: usize,
    /// Links of the network.
    pub links: usize,
    /// Links excluded because their column is zero in the solved matrix.
    pub invisible_links: Vec<usize>,
    pub per_k: Vec<KRatio>,
    pub delta_mode: String,
    pub seed: u64,
}

impl RatioReport {
    pub fn visible_links(&self) -> usize {
        self.links - self.invisible_links.len()
    }

    pub fn ratio(&self, k: usize) -> Option<f64> {
        self.per_k.iter().find(|r| r.k == k).map(|r| r.ratio)
    }

    pub fn mean_ratio(&self, ks: &[usize]) -> f64 {
        let vals: Vec<f64> = ks.iter().filter_map(|&k| self.ratio(k)).collect();
        vals.iter().sum::<f64>() / vals.len().max(1) as f64
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial, from the master seed and the congested set itself, so
/// every scheme and reference sees the same delays for the same set.
fn trial_seed(master: u64, k: usize, set_rank: u128, repeat: u32) -> u64 {
    let mut s = splitmix(master);
    for word in [k as u64, set_rank as u64, (set_rank >> 64) as u64, u64::from(repeat)] {
        s = splitmix(s ^ word);
    }
    s
}

const DELTA_STREAM: u64 = 0x5eed_de17_a000_0001;
const SAMPLE_STREAM: u64 = 0x5eed_5a3b_1e00_0002;

/// The matrix actually solved, restricted to observable links.
struct SolvePlan<'a> {
    routing: &'a RoutingMatrix,
    reference: Option<usize>,
    solved: IntMatrix,
    visible: Vec<usize>,
    invisible: Vec<usize>,
}

impl<'a> SolvePlan<'a> {
    fn new(routing: &'a RoutingMatrix, reference: Option<usize>) -> Result<Self> {
        let full = match reference {
            Some(r) => build_differential_matrix(routing, r)?.entries().clone(),
            None => routing.entries().clone(),
        };
        let invisible = full.zero_columns();
        let visible: Vec<usize> = (0..full.cols()).filter(|c| !invisible.contains(c)).collect();
        Ok(SolvePlan {
            routing,
            reference,
            solved: full.select_cols(&visible),
            visible,
            invisible,
        })
    }

    /// Simulates one trial and reports whether `congested` (link indices) is
    /// recovered exactly with no strongly negative estimate.
    fn identifies<T: Real>(&self, congested: &[usize], cfg: &ExperimentConfig<T>, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Ok(x) = generate_link_delays_with(self.routing.cols(), congested, cfg.delay, &mut rng) else {
            return false;
        };
        let delta = cfg.delta.draw(&mut ChaCha8Rng::seed_from_u64(splitmix(seed ^ DELTA_STREAM)));
        let Ok(y) = path_delays(self.routing.entries(), &x.delays) else {
            return false;
        };
        let z = apply_clock_offset(&y, delta);
        let b = match self.reference {
            Some(r) => match differential_measurements(&z, r) {
                Ok(b) => b,
                Err(_) => return false,
            },
            None => z,
        };
        let Ok(result) = solve_l1_l2(&self.solved, &b, &cfg.solver) else {
            return false;
        };
        let tau = cfg.solver.support_threshold;
        if result.estimate.iter().any(|&v| v < -tau) {
            return false;
        }
        let support: BTreeSet<usize> = result.support.iter().map(|&j| self.visible[j]).collect();
        support.len() == congested.len() && congested.iter().all(|l| support.contains(l))
    }
}

/// Distinct ranks in `0..total`, sorted, by Floyd's algorithm.
fn sample_ranks(total: u128, size: u64, seed: u64) -> Vec<u128> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = u128::from(size).min(total);
    let mut chosen = HashSet::with_capacity(size as usize);
    for j in total - size..total {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut ranks: Vec<u128> = chosen.into_iter().collect();
    ranks.sort_unstable();
    ranks
}

fn run_plan<T: Real>(
    plan: &SolvePlan<'_>,
    cfg: &ExperimentConfig<T>,
) -> Result<Vec<KRatio>> {
    let n = plan.visible.len();
    cfg.k_values
        .iter()
        .map(|&k| {
            let count = binomial(n, k);
            let (sets, enumeration): (Vec<Vec<usize>>, Enumeration) = if count <= cfg.enumeration_cap {
                (Colex::new(n, k).collect(), Enumeration::Exhaustive)
            } else {
                let size = cfg.sample_size.ok_or(TomoError::EnumerationTooLarge {
                    n,
                    k,
                    limit: cfg.enumeration_cap,
                })?;
                let seed = splitmix(cfg.seed ^ SAMPLE_STREAM ^ k as u64);
                let sets = sample_ranks(count, size, seed)
                    .into_iter()
                    .map(|rank| colex_unrank(n, k, rank))
                    .collect();
                (sets, Enumeration::Sampled { seed, size })
            };
            let trials: Vec<(Vec<usize>, u32)> = sets
                .into_iter()
                .flat_map(|s| (0..cfg.repeats).map(move |rep| (s.clone(), rep)))
                .collect();
            let identified = trials
                .par_iter()
                .filter(|(set, rep)| {
                    let links: Vec<usize> = set.iter().map(|&i| plan.visible[i]).collect();
                    let seed = trial_seed(cfg.seed, k, colex_rank(&links), *rep);
                    plan.identifies(&links, cfg, seed)
                })
                .count() as u64;
            let total = trials.len() as u64;
            Ok(KRatio {
                k,
                identified,
                total,
                ratio: if total == 0 { 0.0 } else { identified as f64 / total as f64 },
                enumeration,
            })
        })
        .collect()
}

fn report_for<T: Real>(
    routing: &RoutingMatrix,
    cfg: &ExperimentConfig<T>,
    reference: Option<usize>,
) -> Result<RatioReport> {
    let plan = SolvePlan::new(routing, reference)?;
    let per_k = run_plan(&plan, cfg)?;
    Ok(RatioReport {
        scheme: if reference.is_some() { Scheme::Differential } else { Scheme::Original },
        reference,
        reference_l1: reference.map(|r| routing.row_l1(r)),
        paths: routing.rows(),
        links: routing.cols(),
        invisible_links: plan.invisible,
        per_k,
        delta_mode: cfg.delta.label(),
        seed: cfg.seed,
    })
}

/// k-identifiability ratio `R = N_k / total` for the configured scheme and a
/// single reference row.
pub fn k_identifiability_ratio<T: Real>(
    routing: &RoutingMatrix,
    cfg: &ExperimentConfig<T>,
) -> Result<RatioReport> {
    cfg.validate(routing.cols(), routing.rows())?;
    match (cfg.scheme, cfg.reference) {
        (Scheme::Original, _) => report_for(routing, cfg, None),
        (Scheme::Differential, ReferenceChoice::Row(r)) => report_for(routing, cfg, Some(r)),
        (Scheme::Differential, ReferenceChoice::Sweep) => Err(TomoError::InvalidParameter(
            "a reference sweep yields one report per row; use reference_sweep".into(),
        )),
    }
}

/// One report per reference row, ordered by the reference path's hop count,
/// then by row index.
pub fn reference_sweep<T: Real>(
    routing: &RoutingMatrix,
    cfg: &ExperimentConfig<T>,
) -> Result<Vec<RatioReport>> {
    if cfg.scheme != Scheme::Differential {
        return Err(TomoError::InvalidParameter("reference sweep needs the differential scheme".into()));
    }
    cfg.validate(routing.cols(), routing.rows())?;
    let mut order: Vec<usize> = (0..routing.rows()).collect();
    order.sort_by_key(|&r| (routing.row_l1(r), r));
    order.into_iter().map(|r| report_for(routing, cfg, Some(r))).collect()
}

/// Runs `cfg` for each scheme in `schemes` on every path set. The path sets
/// must be nested (each a prefix of the next).
pub fn row_count_comparison<T: Real>(
    path_sets: &[PathSet],
    cfg: &ExperimentConfig<T>,
    schemes: &[Scheme],
) -> Result<Vec<RatioReport>> {
    for (i, pair) in path_sets.windows(2).enumerate() {
        if !pair[0].is_prefix_of(&pair[1]) || pair[0].len() >= pair[1].len() {
            return Err(TomoError::NotNested { index: i + 2 });
        }
    }
    let mut reports = Vec::new();
    for set in path_sets {
        let routing = build_routing_matrix(set)?;
        for &scheme in schemes {
            let scheme_cfg = ExperimentConfig {
                scheme,
                ..cfg.clone()
            };
            match (scheme, cfg.reference) {
                (Scheme::Differential, ReferenceChoice::Sweep) => {
                    reports.extend(reference_sweep(&routing, &scheme_cfg)?)
                }
                _ => reports.push(k_identifiability_ratio(&routing, &scheme_cfg)?),
            }
        }
    }
    Ok(reports)
}

pub const RESULTS_HEADER: &str =
    "scheme,reference_index,reference_l1,I,J,k,total_sets,identified,R,delta_mode,seed";

/// Results CSV. Metadata lines start with `#`; `J` counts the links that were
/// enumerated (visible links). Reference indices are 1-based.
pub fn results_csv(reports: &[RatioReport], config_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash={config_hash}");
    let _ = writeln!(out, "# generator={GENERATOR_NAME}");
    for (i, rep) in reports.iter().enumerate() {
        let modes: Vec<String> = rep.per_k.iter().map(|r| format!("k={}:{}", r.k, r.enumeration)).collect();
        let invisible: Vec<String> = rep.invisible_links.iter().map(|l| format!("e{}", l + 1)).collect();
        let _ = writeln!(
            out,
            "# block={} scheme={} reference={} links={} invisible=[{}] enumeration={}",
            i + 1,
            rep.scheme,
            rep.reference.map_or("-".to_string(), |r| (r + 1).to_string()),
            rep.links,
            invisible.join(" "),
            modes.join(" ")
        );
    }
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for rep in reports {
        for row in &rep.per_k {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                rep.scheme,
                rep.reference.map_or(String::new(), |r| (r + 1).to_string()),
                rep.reference_l1.map_or(String::new(), |l| l.to_string()),
                rep.paths,
                rep.visible_links(),
                row.k,
                row.total,
                row.identified,
                sig5(row.ratio),
                rep.delta_mode,
                rep.seed
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::DelayParams;

    fn t1() -> RoutingMatrix {
        RoutingMatrix::from_link_sets(
            8,
            &[
                vec![0, 1],
                vec![2, 3],
                vec![0, 4, 3],
                vec![5, 6],
                vec![2, 4, 1],
                vec![0, 7, 6],
            ],
        )
        .unwrap()
    }

    fn t0() -> RoutingMatrix {
        RoutingMatrix::from_link_sets(5, &[vec![0, 1], vec![2, 3], vec![0, 4, 3]]).unwrap()
    }

    fn noiseless(scheme: Scheme, reference: ReferenceChoice, ks: Vec<usize>) -> ExperimentConfig<f64> {
        let mut cfg = ExperimentConfig::new(scheme, reference, ks, 42);
        cfg.delay = DelayParams::noiseless(0);
        cfg
    }

    #[test]
    fn differential_t1_recovers_every_single_link() {
        let rep = k_identifiability_ratio(&t1(), &noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![1])).unwrap();
        assert_eq!(rep.per_k[0].total, 8);
        assert_eq!(rep.per_k[0].identified, 8);
        assert_eq!(rep.per_k[0].ratio, 1.0);
        assert_eq!(rep.reference_l1, Some(2));
    }

    #[test]
    fn t0_differential_is_ambiguous() {
        for r in 0..3 {
            let rep = k_identifiability_ratio(&t0(), &noiseless(Scheme::Differential, ReferenceChoice::Row(r), vec![1])).unwrap();
            assert!(rep.per_k[0].ratio < 1.0, "reference {}", r + 1);
        }
        let routing = t0();
        let plan = SolvePlan::new(&routing, Some(0)).unwrap();
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![1]);
        assert!(!plan.identifies(&[0], &cfg, 1));
    }

    #[test]
    fn synchronised_original_scheme_recovers_single_links() {
        let mut cfg = noiseless(Scheme::Original, ReferenceChoice::Row(0), vec![1]);
        cfg.delta = DeltaMode::Fixed(0.0);
        let rep = k_identifiability_ratio(&t1(), &cfg).unwrap();
        assert_eq!(rep.per_k[0].ratio, 1.0);
        assert_eq!(rep.reference, None);
    }

    #[test]
    fn unsynchronised_original_scheme_fails() {
        let cfg = noiseless(Scheme::Original, ReferenceChoice::Row(0), vec![1, 2]);
        let rep = k_identifiability_ratio(&t1(), &cfg).unwrap();
        assert!(rep.per_k.iter().all(|r| r.identified == 0));
    }

    #[test]
    fn exhaustive_totals_are_binomial() {
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(1), vec![1, 2, 3]);
        let rep = k_identifiability_ratio(&t1(), &cfg).unwrap();
        for row in &rep.per_k {
            assert_eq!(u128::from(row.total), binomial(8, row.k));
            assert_eq!(row.enumeration, Enumeration::Exhaustive);
            assert!((0.0..=1.0).contains(&row.ratio));
        }
    }

    #[test]
    fn sampling_kicks_in_above_the_cap() {
        let mut cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![3]);
        cfg.enumeration_cap = 10;
        assert!(matches!(
            k_identifiability_ratio(&t1(), &cfg),
            Err(TomoError::EnumerationTooLarge { .. })
        ));
        cfg.sample_size = Some(20);
        let rep = k_identifiability_ratio(&t1(), &cfg).unwrap();
        assert_eq!(rep.per_k[0].total, 20);
        assert!(matches!(rep.per_k[0].enumeration, Enumeration::Sampled { size: 20, .. }));
        assert_eq!(rep, k_identifiability_ratio(&t1(), &cfg).unwrap());
    }

    #[test]
    fn floyd_sampling_is_distinct_and_sorted() {
        let ranks = sample_ranks(100, 30, 9);
        assert_eq!(ranks.len(), 30);
        assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_ranks(5, 10, 1), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn config_errors() {
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![0]);
        assert!(k_identifiability_ratio(&t1(), &cfg).is_err());
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![9]);
        assert!(k_identifiability_ratio(&t1(), &cfg).is_err());
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(6), vec![1]);
        assert!(matches!(
            k_identifiability_ratio(&t1(), &cfg),
            Err(TomoError::ReferenceOutOfRange { reference: 7, rows: 6 })
        ));
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Sweep, vec![1]);
        assert!(k_identifiability_ratio(&t1(), &cfg).is_err());
    }

    #[test]
    fn sweep_orders_by_hop_count() {
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Sweep, vec![1]);
        let reps = reference_sweep(&t1(), &cfg).unwrap();
        let tags: Vec<(usize, usize)> = reps.iter().map(|r| (r.reference.unwrap() + 1, r.reference_l1.unwrap())).collect();
        assert_eq!(tags, vec![(1, 2), (2, 2), (4, 2), (3, 3), (5, 3), (6, 3)]);

        let two = RoutingMatrix::from_link_sets(3, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(reference_sweep(&two, &cfg).unwrap().len(), 2);
    }

    #[test]
    fn sweep_flags_cancelled_links() {
        // link e1 is on every path and vanishes from every differential matrix
        let m = RoutingMatrix::from_link_sets(4, &[vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 1, 2]]).unwrap();
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Sweep, vec![1]);
        for rep in reference_sweep(&m, &cfg).unwrap() {
            assert_eq!(rep.invisible_links, vec![0]);
            assert_eq!(rep.visible_links(), 3);
            assert_eq!(rep.per_k[0].total, 3);
        }
    }

    #[test]
    fn differential_reports_ignore_the_offset() {
        let mut a = ExperimentConfig::<f64>::new(Scheme::Differential, ReferenceChoice::Row(0), vec![1, 2], 5);
        a.delta = DeltaMode::Fixed(0.0);
        let mut b = a.clone();
        b.delta = DeltaMode::default_random();
        let ra = k_identifiability_ratio(&t1(), &a).unwrap();
        let rb = k_identifiability_ratio(&t1(), &b).unwrap();
        assert_eq!(ra.per_k, rb.per_k);
    }

    #[test]
    fn csv_layout() {
        let cfg = noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![1]);
        let rep = k_identifiability_ratio(&t1(), &cfg).unwrap();
        let csv = results_csv(&[rep], &cfg.fingerprint("t1"));
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# config_hash="));
        assert_eq!(lines[1], "# generator=ChaCha8Rng");
        assert_eq!(lines[3], RESULTS_HEADER);
        assert!(lines[4].starts_with("differential,1,2,6,8,1,8,8,1.0000,random"));
        assert!(lines[4].ends_with(",42"));
    }

    #[test]
    fn fingerprint_depends_on_config() {
        let a = noiseless(Scheme::Differential, ReferenceChoice::Row(0), vec![1]);
        let mut b = a.clone();
        b.seed = 43;
        assert_ne!(a.fingerprint(""), b.fingerprint(""));
        assert_eq!(a.fingerprint("x"), a.clone().fingerprint("x"));
        assert_eq!(a.fingerprint("").len(), 64);
    }
}
