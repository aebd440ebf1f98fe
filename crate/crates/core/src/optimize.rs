//! NSGA-II over (allocation, permutation) chromosomes.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alloc::Allocation;
use crate::cluster::{cluster_allocation, RobotCluster};
use crate::dsl::ValidatedProblem;
use crate::mdp::{random_task_permutation_with, schedule, BuildConfig, PermutationSet, Plan};
use crate::tasks::TaskGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chromosome {
    pub alloc_idx: usize,
    pub perm_idx: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub p_fail: f64,
    pub idle: f64,
    pub travel: f64,
}

impl Objectives {
    fn as_array(&self) -> [f64; 3] {
        [self.p_fail, self.idle, self.travel]
    }
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    let (a, b) = (a.as_array(), b.as_array());
    a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub permutations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { population: 50, generations: 5, permutations: 20, crossover_rate: 0.9, mutation_rate: 0.2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("population size must be even and at least 4, got {0}")]
    Population(usize),
    #[error("{name} must lie in [0, 1], got {value}")]
    Rate { name: &'static str, value: f64 },
    #[error("at least one permutation per allocation is required")]
    NoPermutations,
    #[error("no allocations to search")]
    NoAllocations,
    #[error("no feasible schedule among {evaluated} evaluated chromosome(s) ({infeasible} infeasible)")]
    NoFeasibleSolution { evaluated: usize, infeasible: usize },
}

impl GaConfig {
    pub fn check(&self) -> Result<(), OptimizeError> {
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return Err(OptimizeError::Population(self.population));
        }
        for (name, value) in [("crossover rate", self.crossover_rate), ("mutation rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(OptimizeError::Rate { name, value });
            }
        }
        if self.permutations == 0 {
            return Err(OptimizeError::NoPermutations);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum Evaluation {
    Feasible { objectives: Objectives, plan: Plan },
    Infeasible { reason: String },
}

impl Evaluation {
    pub fn objectives(&self) -> Option<&Objectives> {
        match self {
            Evaluation::Feasible { objectives, .. } => Some(objectives),
            Evaluation::Infeasible { .. } => None,
        }
    }
}

/// Allocations, their clusters and permutation pools.
pub struct SearchSpace<'a> {
    pub problem: &'a ValidatedProblem,
    pub graph: &'a TaskGraph,
    pub allocations: Vec<Allocation>,
    pub clusters: Vec<Vec<RobotCluster>>,
    /// `pools[a][k]` orders every used robot of allocation `a`.
    pub pools: Vec<Vec<PermutationSet>>,
    pub build: BuildConfig,
}

impl<'a> SearchSpace<'a> {
    /// Pools are drawn from one seeded stream per allocation, so pool `a`
    /// does not depend on how many allocations there are. A pool holds up
    /// to `permutations` distinct entries; small task sets may give fewer.
    pub fn new(
        problem: &'a ValidatedProblem,
        graph: &'a TaskGraph,
        allocations: Vec<Allocation>,
        permutations: usize,
        seed: u64,
        build: BuildConfig,
    ) -> Self {
        let closure = graph.precedence_closure();
        let clusters = allocations.iter().map(|a| cluster_allocation(a, &graph.subtrees)).collect();
        let pools = allocations
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let everyone =
                    RobotCluster { robots: a.used_robots.iter().copied().collect(), instances: (0..a.assignments.len()).collect() };
                let mut pool: Vec<PermutationSet> = Vec::with_capacity(permutations);
                for _ in 0..permutations * 20 {
                    let p = random_task_permutation_with(a, &everyone, &closure, &mut rng);
                    if !pool.contains(&p) {
                        pool.push(p);
                        if pool.len() == permutations {
                            break;
                        }
                    }
                }
                pool
            })
            .collect();
        SearchSpace { problem, graph, allocations, clusters, pools, build }
    }

    pub fn size(&self) -> usize {
        self.pools.iter().map(Vec::len).sum()
    }

    pub fn chromosomes(&self) -> impl Iterator<Item = Chromosome> + '_ {
        self.pools
            .iter()
            .enumerate()
            .flat_map(|(a, pool)| (0..pool.len()).map(move |p| Chromosome { alloc_idx: a, perm_idx: p }))
    }

    pub fn permutation(&self, ch: Chromosome) -> &PermutationSet {
        &self.pools[ch.alloc_idx][ch.perm_idx]
    }
}

type ClusterKey = (Vec<(usize, Vec<usize>)>, PermutationSet);
type ClusterOutcome = Result<(f64, f64, f64, Plan), String>;

/// Memoised, thread-safe chromosome evaluation.
pub struct Evaluator<'s, 'a> {
    space: &'s SearchSpace<'a>,
    cache: Mutex<HashMap<Chromosome, Arc<Evaluation>>>,
    clusters: Mutex<HashMap<ClusterKey, Arc<ClusterOutcome>>>,
    evaluations: AtomicUsize,
}

impl<'s, 'a> Evaluator<'s, 'a> {
    pub fn new(space: &'s SearchSpace<'a>) -> Self {
        Evaluator {
            space,
            cache: Mutex::new(HashMap::new()),
            clusters: Mutex::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn space(&self) -> &SearchSpace<'a> {
        self.space
    }

    /// Number of chromosomes actually computed (cache misses).
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn cached(&self, ch: Chromosome) -> Option<Arc<Evaluation>> {
        self.cache.lock().expect("cache lock").get(&ch).cloned()
    }

    /// Every chromosome evaluated so far.
    pub fn evaluated(&self) -> Vec<(Chromosome, Arc<Evaluation>)> {
        let mut out: Vec<_> = self.cache.lock().expect("cache lock").iter().map(|(k, v)| (*k, v.clone())).collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }

    fn cluster(&self, a: &Allocation, c: &RobotCluster, p: PermutationSet) -> Arc<ClusterOutcome> {
        let key: ClusterKey = (c.instances.iter().map(|&i| (i, a.assignments[i].clone())).collect(), p);
        if let Some(hit) = self.clusters.lock().expect("cluster lock").get(&key) {
            return hit.clone();
        }
        let s = self.space;
        let outcome = match schedule(s.problem, s.graph, a, &key.1, &s.build) {
            Ok(r) if r.feasible => Ok((r.p_success, r.idle, r.travel, r.plan.expect("feasible result has a plan"))),
            Ok(_) => Err("no schedule meets the time and idle budgets".to_string()),
            Err(e) => Err(e.to_string()),
        };
        let outcome = Arc::new(outcome);
        self.clusters.lock().expect("cluster lock").insert(key, outcome.clone());
        outcome
    }

    fn compute(&self, ch: Chromosome) -> Evaluation {
        let s = self.space;
        let a = &s.allocations[ch.alloc_idx];
        let perm = s.permutation(ch);
        let (mut p_success, mut idle, mut travel) = (1.0, 0.0, 0.0);
        let mut plans = Vec::new();
        for c in &s.clusters[ch.alloc_idx] {
            match &*self.cluster(a, c, perm.restrict(&c.robots)) {
                Ok((ps, i, t, plan)) => {
                    p_success *= ps;
                    idle += i;
                    travel += t;
                    plans.push(plan.clone());
                }
                Err(reason) => {
                    let names: Vec<&str> = c.robots.iter().map(|&r| s.problem.robot(r).id.as_str()).collect();
                    return Evaluation::Infeasible { reason: format!("cluster {{{}}}: {reason}", names.join(", ")) };
                }
            }
        }
        let objectives = Objectives { p_fail: 1.0 - p_success, idle, travel };
        Evaluation::Feasible { objectives, plan: Plan::merge(s.problem, plans) }
    }

    pub fn evaluate(&self, ch: Chromosome) -> Arc<Evaluation> {
        if let Some(hit) = self.cached(ch) {
            return hit;
        }
        let e = Arc::new(self.compute(ch));
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().expect("cache lock").insert(ch, e.clone());
        e
    }

    /// Evaluates the distinct uncached chromosomes of `batch` in parallel.
    pub fn evaluate_batch(&self, batch: &[Chromosome]) {
        let todo: BTreeSet<Chromosome> = batch.iter().copied().filter(|&c| self.cached(c).is_none()).collect();
        let done: Vec<(Chromosome, Evaluation)> = todo.into_par_iter().map(|c| (c, self.compute(c))).collect();
        self.evaluations.fetch_add(done.len(), Ordering::Relaxed);
        let mut cache = self.cache.lock().expect("cache lock");
        for (c, e) in done {
            cache.insert(c, Arc::new(e));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParetoEntry {
    pub chromosome: Chromosome,
    pub objectives: Objectives,
    pub plan: Plan,
}

#[derive(Debug, Clone)]
pub struct ParetoFront {
    pub entries: Vec<ParetoEntry>,
    pub evaluated: usize,
    pub infeasible: usize,
}

fn cmp_entries(a: &ParetoEntry, b: &ParetoEntry) -> std::cmp::Ordering {
    let (x, y) = (a.objectives.as_array(), b.objectives.as_array());
    x.iter()
        .zip(&y)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.chromosome.cmp(&b.chromosome))
}

/// Nondominated feasible entries, sorted by objectives then chromosome.
pub fn pareto_set(evaluated: &[(Chromosome, Arc<Evaluation>)]) -> Vec<ParetoEntry> {
    let feasible: Vec<(Chromosome, &Objectives, &Plan)> = evaluated
        .iter()
        .filter_map(|(c, e)| match &**e {
            Evaluation::Feasible { objectives, plan } => Some((*c, objectives, plan)),
            Evaluation::Infeasible { .. } => None,
        })
        .collect();
    let mut out: Vec<ParetoEntry> = feasible
        .iter()
        .filter(|(_, o, _)| !feasible.iter().any(|(_, other, _)| dominates(other, o)))
        .map(|(c, o, p)| ParetoEntry { chromosome: *c, objectives: **o, plan: (*p).clone() })
        .collect();
    out.sort_by(cmp_entries);
    out
}

fn front_from(eval: &Evaluator) -> Result<ParetoFront, OptimizeError> {
    let all = eval.evaluated();
    let infeasible = all.iter().filter(|(_, e)| e.objectives().is_none()).count();
    let entries = pareto_set(&all);
    if entries.is_empty() {
        return Err(OptimizeError::NoFeasibleSolution { evaluated: all.len(), infeasible });
    }
    Ok(ParetoFront { entries, evaluated: all.len(), infeasible })
}

/// Evaluates every chromosome of the space and returns the exact Pareto set.
pub fn exhaustive_front(eval: &Evaluator) -> Result<ParetoFront, OptimizeError> {
    let all: Vec<Chromosome> = eval.space().chromosomes().collect();
    eval.evaluate_batch(&all);
    front_from(eval)
}

/// Domination with feasibility first: any feasible point beats any infeasible one.
fn constrained_dominates(a: Option<&Objectives>, b: Option<&Objectives>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => dominates(x, y),
        (Some(_), None) => true,
        _ => false,
    }
}

/// Fast nondominated sort; returns the rank of each point (0 is best).
pub fn nondominated_ranks(points: &[Option<Objectives>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && constrained_dominates(points[i].as_ref(), points[j].as_ref()) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut rank = vec![usize::MAX; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut level = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = level;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        level += 1;
    }
    rank
}

/// Crowding distance of each point within its own rank.
pub fn crowding_distances(points: &[Option<Objectives>], ranks: &[usize]) -> Vec<f64> {
    let n = points.len();
    let mut dist = vec![0.0; n];
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    for r in 0..=max_rank {
        let members: Vec<usize> = (0..n).filter(|&i| ranks[i] == r && points[i].is_some()).collect();
        if members.len() <= 2 {
            for &i in &members {
                dist[i] = f64::INFINITY;
            }
            continue;
        }
        for k in 0..3 {
            let val = |i: usize| points[i].as_ref().expect("feasible").as_array()[k];
            let mut sorted = members.clone();
            sorted.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(a.cmp(&b)));
            let (lo, hi) = (val(sorted[0]), val(*sorted.last().expect("non-empty")));
            dist[sorted[0]] = f64::INFINITY;
            dist[*sorted.last().expect("non-empty")] = f64::INFINITY;
            if hi > lo {
                for w in 1..sorted.len() - 1 {
                    dist[sorted[w]] += (val(sorted[w + 1]) - val(sorted[w - 1])) / (hi - lo);
                }
            }
        }
    }
    dist
}

fn random_chromosome(space: &SearchSpace, rng: &mut ChaCha8Rng) -> Chromosome {
    let alloc_idx = rng.gen_range(0..space.pools.len());
    Chromosome { alloc_idx, perm_idx: rng.gen_range(0..space.pools[alloc_idx].len()) }
}

fn clamp_perm(space: &SearchSpace, mut c: Chromosome) -> Chromosome {
    c.perm_idx %= space.pools[c.alloc_idx].len();
    c
}

/// Runs NSGA-II and returns the nondominated feasible set of every
/// chromosome evaluated during the run.
pub fn nsga2_run(eval: &Evaluator, cfg: &GaConfig) -> Result<ParetoFront, OptimizeError> {
    cfg.check()?;
    let space = eval.space();
    if space.allocations.is_empty() {
        return Err(OptimizeError::NoAllocations);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let all: Vec<Chromosome> = space.chromosomes().collect();

    let mut population: Vec<Chromosome> =
        sample(&mut rng, all.len(), cfg.population.min(all.len())).into_iter().map(|i| all[i]).collect();
    while population.len() < cfg.population {
        population.push(random_chromosome(space, &mut rng));
    }
    eval.evaluate_batch(&population);

    let objectives_of = |pop: &[Chromosome]| -> Vec<Option<Objectives>> {
        pop.iter().map(|&c| eval.cached(c).and_then(|e| e.objectives().copied())).collect()
    };

    for _ in 0..cfg.generations {
        let points = objectives_of(&population);
        let ranks = nondominated_ranks(&points);
        let crowd = crowding_distances(&points, &ranks);
        let tournament = |rng: &mut ChaCha8Rng| -> Chromosome {
            let (i, j) = (rng.gen_range(0..population.len()), rng.gen_range(0..population.len()));
            let better = ranks[i] < ranks[j] || (ranks[i] == ranks[j] && crowd[i] >= crowd[j]);
            population[if better { i } else { j }]
        };
        let mut offspring = Vec::with_capacity(cfg.population);
        while offspring.len() < cfg.population {
            let (p1, p2) = (tournament(&mut rng), tournament(&mut rng));
            let (mut c1, mut c2) = (p1, p2);
            if rng.gen_bool(cfg.crossover_rate) {
                c1 = clamp_perm(space, Chromosome { alloc_idx: p1.alloc_idx, perm_idx: p2.perm_idx });
                c2 = clamp_perm(space, Chromosome { alloc_idx: p2.alloc_idx, perm_idx: p1.perm_idx });
            }
            for c in [&mut c1, &mut c2] {
                if rng.gen_bool(cfg.mutation_rate) {
                    if rng.gen_bool(0.5) {
                        c.alloc_idx = rng.gen_range(0..space.pools.len());
                        *c = clamp_perm(space, *c);
                    } else {
                        c.perm_idx = rng.gen_range(0..space.pools[c.alloc_idx].len());
                    }
                }
            }
            offspring.push(c1);
            offspring.push(c2);
        }
        eval.evaluate_batch(&offspring);

        let mut combined = population.clone();
        combined.extend(offspring);
        let points = objectives_of(&combined);
        let ranks = nondominated_ranks(&points);
        let crowd = crowding_distances(&points, &ranks);
        let mut idx: Vec<usize> = (0..combined.len()).collect();
        idx.sort_by(|&a, &b| ranks[a].cmp(&ranks[b]).then(crowd[b].total_cmp(&crowd[a])).then(a.cmp(&b)));
        population = idx.into_iter().take(cfg.population).map(|i| combined[i]).collect();
    }
    front_from(eval)
}
