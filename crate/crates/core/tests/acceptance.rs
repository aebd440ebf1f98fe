//! One pass/fail line per acceptance criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use kanoa::alloc::{count_feasible, enumerate_allocations, Allocation, AllocatorConfig};
use kanoa::cluster::{
    cluster_allocation, clusters, components_union_find, relation_matrix, transitive_closure, InterdependenceMatrix,
};
use kanoa::dsl::{load_problem, parse_problem, pretty_print};
use kanoa::mdp::{
    build_mdp, max_reach_probability, random_task_permutation, schedule_model, success_probability, travel_cost,
    BuildConfig, Label,
};
use kanoa::optimize::{dominates, nsga2_run, Chromosome, Evaluator, GaConfig, Objectives, OptimizeError, SearchSpace};
use kanoa::report::{run_source, RunConfig};
use kanoa::tasks::TaskGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HOSPITAL_LIMIT: Duration = Duration::from_secs(120);
const HOSPITAL_TT: u32 = 100;
const HOSPITAL_MAX_IDLE: u32 = 30;
const PROBABILITY_TOL: f64 = 1e-9;
const INTEGER_TOL: f64 = 1e-9;
const MIN_RANDOM_INSTANCES: usize = 100;
const MIN_WITH_IDLING: usize = 40;
const MIN_WITH_CHOICES: usize = 40;
const POLICY_CAP: usize = 200_000;
const MATRICES: usize = 1000;
const MAX_MATRIX: usize = 8;
const MAX_CHROMOSOMES: usize = 60;
const MIN_MALFORMED: usize = 20;
const TIMING_REPEATS: usize = 5;

fn criterion_1() -> String {
    let src = fixture("hospital.kanoa");
    let v = load_problem(&src).unwrap();
    let g = TaskGraph::new(&v);
    assert_eq!(v.spec().world.locations.iter().filter(|l| l.id.starts_with("room")).count(), 6);
    assert_eq!(v.robot_count(), 5);
    assert_eq!(v.spec().mission.tasks.len(), 6);
    assert_eq!(v.time_available(), HOSPITAL_TT);

    let mut cfg = RunConfig { allocations: 10, ..RunConfig::default() };
    cfg.ga = GaConfig { permutations: 10, population: 20, generations: 3, seed: 0, ..GaConfig::default() };
    let out = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let report = run_source(&src, "hospital.kanoa".as_ref(), out.path(), &cfg).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed < HOSPITAL_LIMIT, "took {elapsed:?}");
    assert!(!report.front.is_empty());
    for e in &report.front {
        check_plan(&v, &g, &e.plan).unwrap();
        assert!(e.plan.makespan() <= HOSPITAL_TT);
        for tl in &e.plan.timelines {
            assert!(tl.idle_time() <= HOSPITAL_MAX_IDLE, "{} idles {}", tl.robot, tl.idle_time());
        }
        // notify precedes both cleaning steps of the same room
        for room in 0..4 {
            let span = |id: String| {
                e.plan.timelines.iter().flat_map(|t| &t.events).find(|ev| ev.instance() == Some(&id)).unwrap().span()
            };
            let notify = span(format!("at4_notify_{room}"));
            assert!(notify.1 <= span(format!("at2_floor_{room}")).0);
            assert!(notify.1 <= span(format!("at3_sanit_{room}")).0);
        }
    }
    format!("{} front entries in {:.1} ms", report.front.len(), elapsed.as_secs_f64() * 1e3)
}

fn footnote_case(tt: u32) -> f64 {
    let src = format!(
        "world {{ loc home (0, 0); loc site (6, 0) }}\n\
         tasks {{ atomic inspect needs 1 }}\n\
         robots {{ robot r at home velocity 1 {{ can inspect time 3 prob 0.9 }} }}\n\
         mission {{ do inspect at site; time {tt} }}"
    );
    let v = load_problem(&src).unwrap();
    let g = TaskGraph::new(&v);
    let a = enumerate_allocations(&v, g.instances(), &AllocatorConfig::default()).unwrap().remove(0);
    let c = cluster_allocation(&a, &g.subtrees).remove(0);
    let p = random_task_permutation(&a, &c, &g.precedence_closure(), 0);
    let m = build_mdp(&v, &g, &a, &p, tt, &BuildConfig::default()).unwrap();
    max_reach_probability(&m, Label::Done).unwrap()
}

fn criterion_2() -> String {
    assert_eq!(footnote_case(5), 0.0);
    // six units of travel plus three of work
    assert_eq!(footnote_case(9), 1.0);
    assert_eq!(footnote_case(8), 0.0);
    "budget 5 gives 0, budget 9 gives 1".into()
}

fn criterion_3() -> String {
    let lim = GenLimits { robots: 3, instances: 4, max_time: 20, joint: true, boundaries: false };
    let (mut feasible, mut infeasible, mut skipped) = (0, 0, 0);
    let (mut idling, mut branching) = (0, 0);
    let mut seed = 0;
    while (feasible < MIN_RANDOM_INSTANCES || idling < MIN_WITH_IDLING || branching < MIN_WITH_CHOICES) && seed < 20_000 {
        let v = load_problem(&random_problem(seed, lim)).unwrap();
        let g = TaskGraph::new(&v);
        assert!(v.robot_count() <= 3 && g.instances().len() <= 4 && v.time_available() <= 20);
        let closure = g.precedence_closure();
        let allocs = enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: 3, boundary_filter: true })
            .unwrap();
        for a in &allocs {
            for c in cluster_allocation(a, &g.subtrees) {
                let p = random_task_permutation(a, &c, &closure, seed);
                let m = build_mdp(&v, &g, a, &p, v.time_available(), &BuildConfig::default()).unwrap();
                let Some(en) = enumerate_policies(&m, POLICY_CAP) else {
                    skipped += 1;
                    continue;
                };
                let reach = max_reach_probability(&m, Label::Done).unwrap();
                assert!(reach == 0.0 || reach == 1.0, "seed {seed}: reach {reach}");
                assert!((reach - en.max_reach_done).abs() <= PROBABILITY_TOL, "seed {seed}");
                if reach < 1.0 {
                    assert!(en.complete.is_empty());
                    infeasible += 1;
                    continue;
                }
                let r = schedule_model(&m).unwrap();
                let oracle = en.min_idle().unwrap();
                assert!((oracle - oracle.round()).abs() <= INTEGER_TOL, "seed {seed}: oracle idle {oracle}");
                assert_eq!(r.idle.fract(), 0.0, "seed {seed}");
                assert_eq!(r.idle, oracle.round(), "seed {seed}: idle");

                let analytic = success_probability(&v, g.instances(), a, &c);
                assert!((r.p_success - analytic).abs() <= PROBABILITY_TOL, "seed {seed}: {} vs {analytic}", r.p_success);
                assert!((en.max_reach_success - analytic).abs() <= PROBABILITY_TOL, "seed {seed}");

                let cost = travel_cost(&p, &v, g.instances()) as f64;
                assert_eq!(r.travel, cost, "seed {seed}: travel");
                assert!(en.complete.iter().all(|x| (x.travel - cost).abs() <= PROBABILITY_TOL), "seed {seed}");
                idling += usize::from(r.idle > 0.0);
                branching += usize::from(en.policies > 1);
                feasible += 1;
            }
        }
        seed += 1;
    }
    assert!(feasible >= MIN_RANDOM_INSTANCES, "only {feasible} feasible instances");
    assert!(idling >= MIN_WITH_IDLING && branching >= MIN_WITH_CHOICES, "too few instances with decisions");
    format!(
        "{feasible} feasible ({idling} with idling, {branching} with several policies) and {infeasible} infeasible clusters over {seed} problems ({skipped} too large)"
    )
}

fn fig_clusters() -> Vec<Vec<String>> {
    let src = "world { loc room2 (10, 5); loc room3 (15, 5); loc room5 (25, 5); loc dock (17, 0) }\n\
        tasks { atomic at2_floor needs 1; atomic at3_sanit needs 1; atomic at4_notify needs 1\n\
                compound ct1_clean { at2_floor, at3_sanit }; compound ct2_room ordered { at4_notify, ct1_clean } }\n\
        robots {\n\
          robot r2 at dock velocity 1 { can at4_notify time 2 prob 0.99 }\n\
          robot r3 at dock velocity 1 { can at2_floor time 6 prob 0.97; can at3_sanit time 5 prob 0.96; can at4_notify time 2 prob 0.99 }\n\
          robot r4 at dock velocity 1 { can at2_floor time 6 prob 0.95; can at3_sanit time 5 prob 0.95; can at4_notify time 2 prob 0.99 }\n\
          robot r5 at dock velocity 2 { can at2_floor time 6 prob 0.85; can at3_sanit time 5 prob 0.86; can at4_notify time 2 prob 0.9 }\n\
        }\n\
        mission { do ct2_room at room2; do ct2_room at room3; do at4_notify at room5; time 100 }";
    let v = load_problem(src).unwrap();
    let g = TaskGraph::new(&v);
    let r = |id: &str| v.robot_index(id).unwrap();
    let by_id: Vec<(&str, &str)> = vec![
        ("at4_notify_0", "r3"),
        ("at2_floor_0", "r4"),
        ("at3_sanit_0", "r4"),
        ("at4_notify_1", "r4"),
        ("at2_floor_1", "r5"),
        ("at3_sanit_1", "r5"),
        ("at4_notify_2", "r2"),
    ];
    let mut assignments = vec![Vec::new(); g.instances().len()];
    for (inst, robot) in by_id {
        assignments[g.tree.instance_index(inst).unwrap()] = vec![r(robot)];
    }
    let used_robots = assignments.iter().flatten().copied().collect();
    let a = Allocation { index: 0, assignments, used_robots };
    let m = relation_matrix(&a, &g.subtrees);
    assert!(m.related(r("r3"), r("r4")) && m.related(r("r4"), r("r5")));
    assert!(!m.related(r("r3"), r("r5")) && !m.related(r("r2"), r("r4")));
    let closed = clusters(&transitive_closure(&m), &a);
    assert_eq!(closed, cluster_allocation(&a, &g.subtrees));
    closed.iter().map(|c| c.robots.iter().map(|&x| v.robot(x).id.clone()).collect()).collect()
}

fn criterion_4() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..MATRICES {
        let n = rng.gen_range(1..=MAX_MATRIX);
        let density = rng.gen_range(0.0..0.5);
        let mut m = vec![vec![false; n]; n];
        for i in 0..n {
            m[i][i] = true;
            for j in i + 1..n {
                let b = rng.gen_bool(density);
                m[i][j] = b;
                m[j][i] = b;
            }
        }
        let robots: Vec<usize> = (0..n).map(|i| i * 3 + 1).collect();
        let mat = InterdependenceMatrix { robots: robots.clone(), m: m.clone() };
        let a = Allocation { index: 0, assignments: Vec::new(), used_robots: robots.iter().copied().collect() };
        let uf = normalise(components_union_find(&mat));
        let warshall = normalise(clusters(&transitive_closure(&mat), &a).into_iter().map(|c| c.robots).collect());
        let fix = normalise(
            components_of_closed(&fixpoint_closure(&m)).into_iter().map(|g| g.into_iter().map(|i| robots[i]).collect()).collect(),
        );
        assert_eq!(uf, warshall);
        assert_eq!(warshall, fix);
        assert_eq!(transitive_closure(&mat).m, fixpoint_closure(&m));
    }
    let found = fig_clusters();
    assert_eq!(found, vec![vec!["r2".to_string()], vec!["r3".into(), "r4".into(), "r5".into()]]);
    format!("{MATRICES} matrices agree; example clusters {found:?}")
}

fn criterion_5() -> String {
    let lim = GenLimits { robots: 3, instances: 6, max_time: 40, joint: true, boundaries: true };
    let mut checked = 0;
    let mut strided = 0;
    for seed in 0..400u64 {
        // widen the robot pool beyond the scheduling generator
        let src = random_problem(seed, lim);
        let extra = ChaCha8Rng::seed_from_u64(seed).gen_range(0..=2);
        let mut robots = String::new();
        for k in 0..extra {
            robots.push_str(&format!("  robot x{k} at l0 velocity 1 {{ can a time 1 prob 1; can j time 2 prob 0.9 }}\n"));
        }
        let src = src.replacen("robots {\n", &format!("robots {{\n{robots}"), 1);
        let v = load_problem(&src).unwrap();
        let g = TaskGraph::new(&v);
        assert!(g.instances().len() <= 6 && v.robot_count() <= 5);

        let product: u64 = g
            .instances()
            .iter()
            .map(|i| {
                let able = (0..v.robot_count())
                    .filter(|&r| v.robot(r).capabilities.iter().any(|c| c.task == i.type_id))
                    .count();
                binomial(able as u64, i.robots_needed as u64)
            })
            .product();
        assert_eq!(count_feasible(&v, g.instances()), product.into());
        assert_eq!(brute_allocations(&v, g.instances(), false).len() as u64, product);

        let brute = brute_allocations(&v, g.instances(), true);
        for n in [1usize, 3, 7, 50] {
            let cfg = AllocatorConfig { max_allocations: n, boundary_filter: true };
            let got = match enumerate_allocations(&v, g.instances(), &cfg) {
                Ok(got) => got,
                Err(_) => {
                    assert!(brute.is_empty());
                    continue;
                }
            };
            assert_eq!(got.len(), n.min(brute.len()));
            // ordered subsequence of the brute-force list
            let mut pos = 0;
            for a in &got {
                while pos < brute.len() && brute[pos] != a.assignments {
                    pos += 1;
                }
                assert!(pos < brute.len(), "seed {seed}: allocation not in oracle order");
                pos += 1;
            }
            if brute.len() <= n {
                assert!(got.iter().map(|a| &a.assignments).eq(brute.iter()));
            } else {
                let k = brute.len() / n;
                assert!(got.iter().enumerate().all(|(i, a)| a.assignments == brute[i * k]));
                strided += 1;
            }
            for (i, a) in got.iter().enumerate() {
                assert_eq!(a.index, i);
                for (inst, rs) in g.instances().iter().zip(&a.assignments) {
                    assert_eq!(rs.len(), inst.robots_needed as usize);
                    let mut d = rs.clone();
                    d.dedup();
                    assert_eq!(&d, rs);
                    for &r in rs {
                        assert!(v.robot(r).capabilities.iter().any(|c| c.task == inst.type_id));
                    }
                }
                let union: std::collections::BTreeSet<usize> = a.assignments.iter().flatten().copied().collect();
                assert_eq!(union, a.used_robots);
                for r in &a.used_robots {
                    assert!(!a.instances_of(*r).is_empty());
                }
                let named = a.to_named(&v, g.instances());
                assert_eq!(named.assignments.len(), g.instances().len());
            }
            checked += 1;
        }
    }
    format!("{checked} enumerations checked ({strided} strided)")
}

fn brute_front(space: &SearchSpace) -> Vec<(Chromosome, Objectives)> {
    let eval = Evaluator::new(space);
    let all: Vec<(Chromosome, Objectives)> =
        space.chromosomes().filter_map(|c| eval.evaluate(c).objectives().map(|o| (c, *o))).collect();
    let better = |a: &Objectives, b: &Objectives| {
        let (x, y) = ([a.p_fail, a.idle, a.travel], [b.p_fail, b.idle, b.travel]);
        (0..3).all(|k| x[k] <= y[k]) && (0..3).any(|k| x[k] < y[k])
    };
    let mut front: Vec<(Chromosome, Objectives)> =
        all.iter().filter(|(_, o)| !all.iter().any(|(_, p)| better(p, o))).copied().collect();
    front.sort_by_key(|x| x.0);
    front
}

fn criterion_6() -> String {
    let lim = GenLimits { robots: 3, instances: 4, max_time: 20, joint: true, boundaries: false };
    let (mut exact, mut empty, mut runs) = (0, 0, 0);
    for seed in 0..60u64 {
        let v = load_problem(&random_problem(seed, lim)).unwrap();
        let g = TaskGraph::new(&v);
        let allocs = enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: 6, boundary_filter: true })
            .unwrap();
        let space = SearchSpace::new(&v, &g, allocs, 10, seed, BuildConfig::default());
        assert!(space.size() <= MAX_CHROMOSOMES);
        let oracle = brute_front(&space);

        let pop = space.size().max(4).div_ceil(2) * 2;
        let cfg = GaConfig { population: pop, generations: 2, permutations: 10, seed, ..GaConfig::default() };
        match nsga2_run(&Evaluator::new(&space), &cfg) {
            Ok(front) => {
                let mut got: Vec<(Chromosome, Objectives)> =
                    front.entries.iter().map(|e| (e.chromosome, e.objectives)).collect();
                got.sort_by_key(|x| x.0);
                assert_eq!(got, oracle, "seed {seed}");
                exact += 1;
            }
            Err(OptimizeError::NoFeasibleSolution { .. }) => {
                assert!(oracle.is_empty());
                empty += 1;
            }
            Err(e) => panic!("{e}"),
        }

        for small_seed in [seed, seed + 1000] {
            let cfg = GaConfig { population: 4, generations: 3, permutations: 10, seed: small_seed, ..GaConfig::default() };
            let first = nsga2_run(&Evaluator::new(&space), &cfg);
            let second = nsga2_run(&Evaluator::new(&space), &cfg);
            match (first, second) {
                (Ok(x), Ok(y)) => {
                    let key = |f: &kanoa::optimize::ParetoFront| {
                        f.entries.iter().map(|e| (e.chromosome, e.objectives)).collect::<Vec<_>>()
                    };
                    assert_eq!(key(&x), key(&y));
                    for a in &x.entries {
                        assert!(x.entries.iter().all(|b| !dominates(&b.objectives, &a.objectives)));
                    }
                }
                (Err(x), Err(y)) => assert_eq!(x, y),
                _ => panic!("seed {small_seed}: runs disagree"),
            }
            runs += 1;
        }
    }
    assert!(exact >= 20, "only {exact} non-empty exact fronts");
    format!("{exact} fronts equal the brute-force set, {empty} spaces without feasible plans, {runs} repeat runs identical")
}

fn criterion_7() -> String {
    let mut fixtures = 0;
    for entry in std::fs::read_dir(fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "kanoa") {
            let src = std::fs::read_to_string(&path).unwrap();
            let ast = parse_problem(&src).unwrap();
            let printed = pretty_print(&ast);
            assert_eq!(parse_problem(&printed).unwrap(), ast, "{}", path.display());
            assert_eq!(load_problem(&printed).unwrap(), load_problem(&src).unwrap());
            fixtures += 1;
        }
    }
    let mut malformed = 0;
    for entry in std::fs::read_dir(fixture_dir().join("malformed")).unwrap() {
        let path = entry.unwrap().path();
        let src = std::fs::read_to_string(&path).unwrap();
        let lines = src.lines().count().max(1) as u32 + 1;
        let result = catch_unwind(|| load_problem(&src));
        let err = result.unwrap_or_else(|_| panic!("{} panicked", path.display())).expect_err("must be rejected");
        let positions: Vec<(u32, u32)> = match &err {
            kanoa::Error::Syntax(e) => vec![(e.line, e.col)],
            kanoa::Error::Validation(v) => v.0.iter().map(|x| (x.span.line, x.span.col)).collect(),
        };
        assert!(!positions.is_empty());
        for (line, col) in positions {
            assert!(line >= 1 && line <= lines && col >= 1, "{}: bad position {line}:{col}", path.display());
        }
        malformed += 1;
    }
    assert!(fixtures >= 5);
    assert!(malformed >= MIN_MALFORMED, "only {malformed} malformed inputs");
    format!("{fixtures} fixtures round-trip, {malformed} malformed inputs diagnosed")
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Median time per evaluated chromosome over allocations whose robots form one cluster of `size`.
pub fn time_per_chromosome(name: &str, size: usize) -> f64 {
    let (v, g) = load(name);
    let allocs: Vec<Allocation> =
        enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: 300, boundary_filter: true })
            .unwrap()
            .into_iter()
            .filter(|a| {
                let cs = cluster_allocation(a, &g.subtrees);
                cs.len() == 1 && cs[0].robots.len() == size
            })
            .take(3)
            .enumerate()
            .map(|(i, mut a)| {
                a.index = i;
                a
            })
            .collect();
    assert!(!allocs.is_empty(), "{name}: no allocation with a {size}-robot cluster");
    let space = SearchSpace::new(&v, &g, allocs, 4, 0, BuildConfig::default());
    let samples = (0..TIMING_REPEATS)
        .map(|_| {
            let eval = Evaluator::new(&space);
            let start = Instant::now();
            for c in space.chromosomes() {
                eval.evaluate(c);
            }
            start.elapsed().as_secs_f64() / space.size() as f64
        })
        .collect();
    median(samples)
}

fn criterion_8() -> String {
    let t: Vec<f64> =
        [("v3.kanoa", 1), ("v4.kanoa", 2), ("v5.kanoa", 3)].iter().map(|&(n, k)| time_per_chromosome(n, k)).collect();
    assert!(t[0] < t[1] && t[1] < t[2], "not monotone: {t:?}");
    format!("per chromosome {:.3} ms, {:.3} ms, {:.3} ms", t[0] * 1e3, t[1] * 1e3, t[2] * 1e3)
}

fn main() -> std::process::ExitCode {
    let criteria: [(&str, fn() -> String); 8] = [
        ("hospital end-to-end", criterion_1),
        ("feasibility of the time budget", criterion_2),
        ("scheduler objectives against policy enumeration", criterion_3),
        ("clusters against closure oracles", criterion_4),
        ("allocations against brute force", criterion_5),
        ("NSGA-II front against brute force", criterion_6),
        ("parser round-trip and malformed inputs", criterion_7),
        ("evaluation cost grows with cluster size", criterion_8),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {}: FAIL  {name}: {msg}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
