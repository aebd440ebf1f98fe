#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use kanoa::dsl::{load_problem, ConstraintSpec, Subject, ValidatedProblem};
use kanoa::mdp::{Event, Label, Mdp, Plan};
use kanoa::tasks::{TaskGraph, TaskInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> (ValidatedProblem, TaskGraph) {
    let v = load_problem(&fixture(name)).unwrap();
    let g = TaskGraph::new(&v);
    (v, g)
}

// ---------------------------------------------------------------------------
// Allocations by generate-and-check.

fn capable(v: &ValidatedProblem, robot: usize, inst: &TaskInstance) -> bool {
    v.robot(robot).capabilities.iter().any(|c| c.task == inst.type_id)
}

fn inside(v: &ValidatedProblem, robot: usize, inst: &TaskInstance) -> bool {
    let id = &v.robot(robot).id;
    let loc = v.spec().world.locations.iter().find(|l| l.id == inst.location_id).unwrap();
    v.spec().mission.constraints.iter().all(|c| match c {
        ConstraintSpec::Boundary { subject, rect, .. } => {
            let applies = match subject {
                Subject::All => true,
                Subject::Robot(r) => r == id,
            };
            !applies || (rect.min_x <= loc.x && loc.x <= rect.max_x && rect.min_y <= loc.y && loc.y <= rect.max_y)
        }
        _ => true,
    })
}

/// Every robot subset of the right size able (and allowed) to do the instance,
/// found by scanning all bit masks, sorted lexicographically.
pub fn subsets_for(v: &ValidatedProblem, inst: &TaskInstance, boundaries: bool) -> Vec<Vec<usize>> {
    let n = v.robot_count();
    let mut out: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|r| mask & (1 << r) != 0).collect::<Vec<_>>())
        .filter(|s| s.len() == inst.robots_needed as usize)
        .filter(|s| s.iter().all(|&r| capable(v, r, inst) && (!boundaries || inside(v, r, inst))))
        .collect();
    out.sort();
    out
}

/// The full allocation space in lexicographic order (last instance fastest).
pub fn brute_allocations(v: &ValidatedProblem, instances: &[TaskInstance], boundaries: bool) -> Vec<Vec<Vec<usize>>> {
    let choices: Vec<Vec<Vec<usize>>> = instances.iter().map(|i| subsets_for(v, i, boundaries)).collect();
    if choices.iter().any(|c| c.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; choices.len()];
    loop {
        out.push(digits.iter().enumerate().map(|(i, &d)| choices[i][d].clone()).collect());
        let mut k = choices.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < choices[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

// ---------------------------------------------------------------------------
// Closure by repeated boolean squaring.

pub fn fixpoint_closure(m: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = m.len();
    let mut cur: Vec<Vec<bool>> = m.to_vec();
    for (i, row) in cur.iter_mut().enumerate() {
        row[i] = true;
    }
    loop {
        let next: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| cur[i][k] && cur[k][j])).collect()).collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Components of a closed relation as sorted groups, sorted by first member.
pub fn components_of_closed(c: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..c.len() {
        if !groups.iter().any(|g| g.contains(&i)) {
            groups.push((0..c.len()).filter(|&j| c[i][j]).collect());
        }
    }
    groups
}

pub fn normalise(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}

// ---------------------------------------------------------------------------
// Exhaustive policy enumeration on acyclic models.

#[derive(Debug, Clone, Copy)]
pub struct PolicyValues {
    pub reach_done: f64,
    pub reach_success: f64,
    pub idle: f64,
    pub travel: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    pub policies: usize,
    /// Values of policies that reach `done` almost surely.
    pub complete: Vec<PolicyValues>,
    pub max_reach_done: f64,
    pub max_reach_success: f64,
}

impl Enumeration {
    pub fn min_idle(&self) -> Option<f64> {
        self.complete.iter().map(|p| p.idle).min_by(f64::total_cmp)
    }
}

fn evaluate_policy(m: &Mdp, choice: &HashMap<usize, usize>) -> PolicyValues {
    fn go(m: &Mdp, s: usize, choice: &HashMap<usize, usize>, memo: &mut HashMap<usize, PolicyValues>) -> PolicyValues {
        if let Some(v) = memo.get(&s) {
            return *v;
        }
        let v = if m.done[s] {
            let hit = if m.success[s] { 1.0 } else { 0.0 };
            PolicyValues { reach_done: 1.0, reach_success: hit, idle: 0.0, travel: 0.0 }
        } else if m.choices(s).is_empty() {
            PolicyValues { reach_done: 0.0, reach_success: 0.0, idle: 0.0, travel: 0.0 }
        } else {
            let c = &m.choices(s)[choice.get(&s).copied().unwrap_or(0)];
            let mut acc = PolicyValues { reach_done: 0.0, reach_success: 0.0, idle: c.idle as f64, travel: c.travel as f64 };
            for &(t, p) in m.branches(c) {
                let sub = go(m, t as usize, choice, memo);
                acc.reach_done += p * sub.reach_done;
                acc.reach_success += p * sub.reach_success;
                acc.idle += p * sub.idle;
                acc.travel += p * sub.travel;
            }
            acc
        };
        memo.insert(s, v);
        v
    }
    go(m, m.initial(), choice, &mut HashMap::new())
}

/// Enumerates every deterministic memoryless policy, distinguishing policies
/// only on states they can reach. Returns `None` past `cap` policies.
pub fn enumerate_policies(m: &Mdp, cap: usize) -> Option<Enumeration> {
    fn reachable_undecided(m: &Mdp, choice: &HashMap<usize, usize>) -> Option<usize> {
        let mut stack = vec![m.initial()];
        let mut seen = vec![false; m.num_states()];
        while let Some(s) = stack.pop() {
            if seen[s] || m.done[s] {
                continue;
            }
            seen[s] = true;
            let cs = m.choices(s);
            if cs.is_empty() {
                continue;
            }
            let k = match choice.get(&s) {
                Some(&k) => k,
                None if cs.len() == 1 => 0,
                None => return Some(s),
            };
            stack.extend(m.branches(&cs[k]).iter().map(|b| b.0 as usize));
        }
        None
    }
    fn go(m: &Mdp, choice: &mut HashMap<usize, usize>, out: &mut Enumeration, cap: usize) -> bool {
        match reachable_undecided(m, choice) {
            None => {
                out.policies += 1;
                if out.policies > cap {
                    return false;
                }
                let v = evaluate_policy(m, choice);
                out.max_reach_done = out.max_reach_done.max(v.reach_done);
                out.max_reach_success = out.max_reach_success.max(v.reach_success);
                if v.reach_done >= 1.0 - 1e-9 {
                    out.complete.push(v);
                }
                true
            }
            Some(s) => {
                for k in 0..m.choices(s).len() {
                    choice.insert(s, k);
                    if !go(m, choice, out, cap) {
                        return false;
                    }
                }
                choice.remove(&s);
                true
            }
        }
    }
    let mut out = Enumeration::default();
    go(m, &mut HashMap::new(), &mut out, cap).then_some(out)
}

/// Random acyclic model: every branch leads to a higher-numbered state.
pub fn random_dag_mdp(rng: &mut ChaCha8Rng, states: usize, max_choices: usize) -> Mdp {
    let mut all = Vec::with_capacity(states);
    let mut done = vec![false; states];
    let mut success = vec![false; states];
    for s in 0..states {
        let remaining = states - s - 1;
        if remaining == 0 || (s > 0 && rng.gen_bool(0.15)) {
            done[s] = rng.gen_bool(0.7);
            success[s] = done[s] && rng.gen_bool(0.6);
            all.push(Vec::new());
            continue;
        }
        let n = rng.gen_range(1..=max_choices);
        let cs = (0..n)
            .map(|k| {
                let width = rng.gen_range(1..=remaining.min(3));
                let mut targets: Vec<usize> = (0..width).map(|_| rng.gen_range(s + 1..states)).collect();
                targets.sort_unstable();
                targets.dedup();
                let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(1..=4) as f64).collect();
                let total: f64 = weights.iter().sum();
                let dist = targets.into_iter().zip(weights).map(|(t, w)| (t, w / total)).collect();
                (kanoa::mdp::Action::Other(k), dist, rng.gen_range(0..4), rng.gen_range(0..3))
            })
            .collect();
        all.push(cs);
    }
    Mdp::from_parts(all, done, success)
}

pub fn label_of(m: &Mdp, label: Label) -> Vec<bool> {
    match label {
        Label::Done => m.done.clone(),
        Label::Success => m.success.clone(),
    }
}

// ---------------------------------------------------------------------------
// Random problems.

#[derive(Debug, Clone, Copy)]
pub struct GenLimits {
    pub robots: usize,
    pub instances: usize,
    pub max_time: u32,
    pub joint: bool,
    pub boundaries: bool,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits { robots: 3, instances: 4, max_time: 20, joint: true, boundaries: false }
    }
}

/// Source text of a random valid problem within `lim`.
pub fn random_problem(seed: u64, lim: GenLimits) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nloc = rng.gen_range(2..=4);
    let locs: Vec<(i64, i64)> = (0..nloc).map(|_| (rng.gen_range(0..=6), rng.gen_range(0..=6))).collect();
    let nrob = rng.gen_range(1..=lim.robots);
    let joint_needs = if lim.joint && nrob >= 2 && rng.gen_bool(0.5) { 2 } else { 1 };

    let mut mission = Vec::new();
    let mut count = 0;
    let target = rng.gen_range(1..=lim.instances);
    let mut used = [false; 3];
    while count < target {
        let room = rng.gen_range(0..nloc);
        match rng.gen_range(0..4) {
            0 => {
                mission.push(format!("do a at l{room}"));
                used[0] = true;
                count += 1;
            }
            1 => {
                mission.push(format!("do b at l{room}"));
                used[1] = true;
                count += 1;
            }
            2 => {
                mission.push(format!("do j at l{room}"));
                used[2] = true;
                count += 1;
            }
            _ if count + 2 <= target => {
                mission.push(format!("do seq at l{room}"));
                used[0] = true;
                used[1] = true;
                count += 2;
            }
            _ => {}
        }
    }

    let probs = [0.5, 0.8, 0.9, 0.95, 0.99, 1.0];
    let velocities = ["1", "2", "3/2", "0.5"];
    let mut caps: Vec<Vec<bool>> = (0..nrob).map(|_| (0..3).map(|_| rng.gen_bool(0.7)).collect()).collect();
    for (t, &need) in [1usize, 1, joint_needs].iter().enumerate() {
        let mut have = caps.iter().filter(|c| c[t]).count();
        let mut r = 0;
        while have < need {
            if !caps[r][t] {
                caps[r][t] = true;
                have += 1;
            }
            r += 1;
        }
    }
    let mut robots = String::new();
    for (r, cap) in caps.iter().enumerate() {
        let at = rng.gen_range(0..nloc);
        let vel = velocities[rng.gen_range(0..velocities.len())];
        let lines: Vec<String> = ["a", "b", "j"]
            .iter()
            .zip(cap)
            .filter(|(_, &c)| c)
            .map(|(t, _)| format!("can {t} time {} prob {}", rng.gen_range(1..=4), probs[rng.gen_range(0..probs.len())]))
            .collect();
        robots.push_str(&format!("  robot r{r} at l{at} velocity {vel} {{ {} }}\n", lines.join("; ")));
    }

    let mut constraints = vec![format!("time {}", rng.gen_range(6..=lim.max_time))];
    if rng.gen_bool(0.3) {
        constraints.push(format!("maxidle all {}", rng.gen_range(1..=8)));
    }
    if lim.boundaries && rng.gen_bool(0.5) {
        let r = rng.gen_range(0..nrob);
        constraints.push(format!("boundary r{r} (0, 0) ({}, {})", rng.gen_range(2..=6), rng.gen_range(2..=6)));
    }

    let world: Vec<String> = locs.iter().enumerate().map(|(i, (x, y))| format!("loc l{i} ({x}, {y})")).collect();
    format!(
        "world {{ {} }}\ntasks {{ atomic a needs 1; atomic b needs 1; atomic j needs {joint_needs}; compound seq ordered {{ a, b }} }}\nrobots {{\n{robots}}}\nmission {{ {}; {} }}\n",
        world.join("; "),
        mission.join("; "),
        constraints.join("; ")
    )
}

// ---------------------------------------------------------------------------
// Plan checks, written against the problem text rather than the planner.

pub fn check_plan(v: &ValidatedProblem, graph: &TaskGraph, plan: &Plan) -> Result<(), String> {
    let mut runs: BTreeMap<&str, Vec<(u32, u32, bool)>> = BTreeMap::new();
    for tl in &plan.timelines {
        let mut last = 0;
        let mut idle = 0;
        for e in &tl.events {
            let (s, t) = e.span();
            if s < last || t < s {
                return Err(format!("{}: overlapping or reversed event {s}..{t}", tl.robot));
            }
            if t > v.time_available() {
                return Err(format!("{}: ends at {t}, past the budget", tl.robot));
            }
            last = t;
            match e {
                Event::Idle { .. } => idle += t - s,
                Event::Execute { instance, .. } => runs.entry(instance).or_default().push((s, t, false)),
                Event::JointSync { instance, .. } => runs.entry(instance).or_default().push((s, t, true)),
                Event::Travel { .. } => {}
            }
        }
        let r = v.robot_index(&tl.robot).ok_or("unknown robot")?;
        let limit = v
            .spec()
            .mission
            .constraints
            .iter()
            .filter_map(|c| match c {
                ConstraintSpec::MaxIdle { subject: Subject::All, budget, .. } => Some(*budget),
                ConstraintSpec::MaxIdle { subject: Subject::Robot(x), budget, .. } if *x == v.robot(r).id => Some(*budget),
                _ => None,
            })
            .min();
        if let Some(limit) = limit {
            if idle > limit {
                return Err(format!("{} idles {idle} > {limit}", tl.robot));
            }
        }
    }
    for inst in graph.instances() {
        let Some(rs) = runs.get(inst.id.as_str()) else {
            return Err(format!("{} is never executed", inst.id));
        };
        if rs.len() != inst.robots_needed as usize {
            return Err(format!("{} executed by {} robots, needs {}", inst.id, rs.len(), inst.robots_needed));
        }
        if inst.robots_needed > 1 && (rs.iter().any(|x| !x.2 || x.0 != rs[0].0 || x.1 != rs[0].1)) {
            return Err(format!("{} is not synchronous", inst.id));
        }
    }
    for p in &graph.precedence {
        let before = &runs[graph.instance(p.before).id.as_str()];
        let after = &runs[graph.instance(p.after).id.as_str()];
        if before[0].1 > after[0].0 {
            return Err(format!("{} ends after {} starts", graph.instance(p.before).id, graph.instance(p.after).id));
        }
    }
    Ok(())
}
