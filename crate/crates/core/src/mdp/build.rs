use std::collections::HashMap;

use crate::alloc::Allocation;
use crate::dsl::ValidatedProblem;
use crate::tasks::TaskGraph;

use super::model::{Action, Mdp, ModelMeta, RawChoice, Step, StepKind, ROBOT_SLOTS};
use super::perm::PermutationSet;
use super::MdpError;

/// Which interleavings the model exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    /// Only robots with the smallest clock move; idling is offered only to a
    /// robot whose next step waits on a partner or a predecessor; a pending
    /// failure is recovered before anything else happens.
    #[default]
    Reduced,
    /// Every robot may move, idle or recover at any point the guards allow.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildConfig {
    pub state_cap: usize,
    pub semantics: Semantics,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { state_cap: 5_000_000, semantics: Semantics::Reduced }
    }
}

struct Ctx<'a> {
    steps: &'a [Vec<Step>],
    /// Cluster positions of each joint instance's participants.
    participants: HashMap<usize, Vec<usize>>,
    /// Tracked slots of the direct predecessors of each instance.
    preds: HashMap<usize, Vec<usize>>,
    slot: HashMap<usize, usize>,
    max_idle: Vec<u32>,
    tt: u32,
    n: usize,
    semantics: Semantics,
}

#[derive(PartialEq, Eq)]
enum Readiness {
    Ready,
    /// Waiting on a partner or a predecessor.
    Blocked,
    /// Out of time; waiting cannot help.
    Dead,
}

impl Ctx<'_> {
    fn order(&self, s: &[u32], r: usize) -> usize {
        s[r * ROBOT_SLOTS] as usize
    }
    fn time(&self, s: &[u32], r: usize) -> u32 {
        s[r * ROBOT_SLOTS + 1]
    }
    fn idle(&self, s: &[u32], r: usize) -> u32 {
        s[r * ROBOT_SLOTS + 2]
    }
    fn failed(&self, s: &[u32], r: usize) -> bool {
        s[r * ROBOT_SLOTS + 3] != 0
    }
    fn finished(&self, s: &[u32], r: usize) -> bool {
        self.order(s, r) == self.steps[r].len()
    }
    fn ever_slot(&self) -> usize {
        self.n * ROBOT_SLOTS
    }

    fn preds_done_by(&self, s: &[u32], instance: usize, t: u32) -> bool {
        self.preds
            .get(&instance)
            .is_none_or(|ps| ps.iter().all(|&k| s[self.ever_slot() + 1 + k] != 0 && s[self.ever_slot() + 1 + k] - 1 <= t))
    }

    fn readiness(&self, s: &[u32], r: usize) -> Readiness {
        let step = &self.steps[r][self.order(s, r)];
        let t = self.time(s, r);
        if t + step.duration() > self.tt {
            return Readiness::Dead;
        }
        match step.kind {
            StepKind::JointTravel => Readiness::Ready,
            StepKind::Task => {
                if self.preds_done_by(s, step.instance, t) {
                    Readiness::Ready
                } else {
                    Readiness::Blocked
                }
            }
            StepKind::JointSync => {
                let together = self.participants[&step.instance].iter().all(|&q| {
                    !self.finished(s, q)
                        && !self.failed(s, q)
                        && self.time(s, q) == t
                        && matches!(&self.steps[q][self.order(s, q)], st if st.kind == StepKind::JointSync && st.instance == step.instance)
                });
                if together && self.preds_done_by(s, step.instance, t) {
                    Readiness::Ready
                } else {
                    Readiness::Blocked
                }
            }
        }
    }

    fn can_idle(&self, s: &[u32], r: usize) -> bool {
        self.time(s, r) < self.tt && self.idle(s, r) < self.max_idle[r]
    }

    fn complete(&self, s: &mut [u32], instance: usize, at: u32) {
        if let Some(&k) = self.slot.get(&instance) {
            s[self.ever_slot() + 1 + k] = at + 1;
        }
    }

    /// Choices of robot `r` moving (not idling), given it is ready.
    fn step_choice(&self, s: &[u32], r: usize, intern: &mut impl FnMut(Box<[u32]>) -> usize) -> Option<RawChoice> {
        let o = self.order(s, r);
        let step = &self.steps[r][o];
        let t = self.time(s, r);
        let end = t + step.duration();
        match step.kind {
            StepKind::Task => {
                let mut ok: Box<[u32]> = s.into();
                ok[r * ROBOT_SLOTS] += 1;
                ok[r * ROBOT_SLOTS + 1] = end;
                self.complete(&mut ok, step.instance, end);
                let mut dist = vec![(intern(ok), step.prob)];
                if step.prob < 1.0 {
                    let mut bad: Box<[u32]> = s.into();
                    bad[r * ROBOT_SLOTS + 1] = end;
                    bad[r * ROBOT_SLOTS + 3] = 1;
                    bad[self.ever_slot()] = 1;
                    dist.push((intern(bad), 1.0 - step.prob));
                }
                Some((Action::Task { robot: r, step: o }, dist, step.distance, 0))
            }
            StepKind::JointTravel => {
                let mut next: Box<[u32]> = s.into();
                next[r * ROBOT_SLOTS] += 1;
                next[r * ROBOT_SLOTS + 1] = end;
                Some((Action::JointTravel { robot: r, step: o }, vec![(intern(next), 1.0)], step.distance, 0))
            }
            StepKind::JointSync => {
                let parts = &self.participants[&step.instance];
                // fired once, by the first participant
                if parts[0] != r {
                    return None;
                }
                let prob: f64 = parts.iter().map(|&q| self.steps[q][self.order(s, q)].prob).product();
                let mut ok: Box<[u32]> = s.into();
                let mut bad: Box<[u32]> = s.into();
                for &q in parts {
                    ok[q * ROBOT_SLOTS] += 1;
                    ok[q * ROBOT_SLOTS + 1] = end;
                    bad[q * ROBOT_SLOTS + 1] = end;
                    bad[q * ROBOT_SLOTS + 3] = 1;
                }
                bad[self.ever_slot()] = 1;
                self.complete(&mut ok, step.instance, end);
                let mut dist = vec![(intern(ok), prob)];
                if prob < 1.0 {
                    dist.push((intern(bad), 1.0 - prob));
                }
                Some((Action::JointSync { instance: step.instance }, dist, 0, 0))
            }
        }
    }

    fn idle_choice(&self, s: &[u32], r: usize, intern: &mut impl FnMut(Box<[u32]>) -> usize) -> RawChoice {
        let mut next: Box<[u32]> = s.into();
        next[r * ROBOT_SLOTS + 1] += 1;
        next[r * ROBOT_SLOTS + 2] += 1;
        (Action::Idle { robot: r }, vec![(intern(next), 1.0)], 0, 1)
    }

    fn recover_choice(&self, s: &[u32], r: usize, intern: &mut impl FnMut(Box<[u32]>) -> usize) -> RawChoice {
        let step = &self.steps[r][self.order(s, r)];
        let mut next: Box<[u32]> = s.into();
        next[r * ROBOT_SLOTS] += 1;
        next[r * ROBOT_SLOTS + 3] = 0;
        if step.kind != StepKind::JointTravel {
            self.complete(&mut next, step.instance, self.time(s, r));
        }
        (Action::Recover { robot: r }, vec![(intern(next), 1.0)], 0, 0)
    }

    fn successors(&self, s: &[u32], intern: &mut impl FnMut(Box<[u32]>) -> usize) -> Vec<RawChoice> {
        let mut out = Vec::new();
        let failed: Vec<usize> = (0..self.n).filter(|&r| self.failed(s, r)).collect();
        match self.semantics {
            Semantics::Reduced => {
                if let Some(&r) = failed.first() {
                    out.push(self.recover_choice(s, r, intern));
                    return out;
                }
                let Some(now) = (0..self.n).filter(|&r| !self.finished(s, r)).map(|r| self.time(s, r)).min() else {
                    return out;
                };
                for r in (0..self.n).filter(|&r| !self.finished(s, r) && self.time(s, r) == now) {
                    match self.readiness(s, r) {
                        Readiness::Ready => out.extend(self.step_choice(s, r, intern)),
                        Readiness::Blocked if self.can_idle(s, r) => out.push(self.idle_choice(s, r, intern)),
                        _ => {}
                    }
                }
            }
            Semantics::Full => {
                for r in 0..self.n {
                    if self.failed(s, r) {
                        out.push(self.recover_choice(s, r, intern));
                        continue;
                    }
                    if self.finished(s, r) {
                        continue;
                    }
                    if self.readiness(s, r) == Readiness::Ready {
                        out.extend(self.step_choice(s, r, intern));
                    }
                    if self.can_idle(s, r) {
                        out.push(self.idle_choice(s, r, intern));
                    }
                }
            }
        }
        out
    }
}

/// Robot programs for a permutation: a single step per solo task, and a
/// travel step followed by a synchronised step per joint task.
pub fn robot_steps(v: &ValidatedProblem, graph: &TaskGraph, a: &Allocation, p: &PermutationSet) -> Vec<Vec<Step>> {
    p.robots
        .iter()
        .zip(&p.orders)
        .map(|(&r, order)| {
            let mut at = v.robot_location(r);
            let mut steps = Vec::new();
            for &i in order {
                let inst = graph.instance(i);
                let to = inst.location;
                let (distance, travel_time) = (v.distance(at, to), v.travel_time(r, at, to));
                let cap = v.capability(r, inst.atomic).expect("assigned robot is capable");
                if inst.is_joint() {
                    let exec_time = a.assignments[i]
                        .iter()
                        .map(|&q| v.capability(q, inst.atomic).expect("capable").required_time)
                        .max()
                        .unwrap_or(cap.required_time);
                    steps.push(Step {
                        kind: StepKind::JointTravel,
                        instance: i,
                        from: at,
                        to,
                        distance,
                        travel_time,
                        exec_time: 0,
                        prob: 1.0,
                    });
                    steps.push(Step {
                        kind: StepKind::JointSync,
                        instance: i,
                        from: to,
                        to,
                        distance: 0,
                        travel_time: 0,
                        exec_time,
                        prob: cap.success_prob,
                    });
                } else {
                    steps.push(Step {
                        kind: StepKind::Task,
                        instance: i,
                        from: at,
                        to,
                        distance,
                        travel_time,
                        exec_time: cap.required_time,
                        prob: cap.success_prob,
                    });
                }
                at = to;
            }
            steps
        })
        .collect()
}

/// Builds the reachable part of the scheduling MDP of one cluster under the
/// given permutation and time budget.
pub fn build_mdp(
    v: &ValidatedProblem,
    graph: &TaskGraph,
    a: &Allocation,
    p: &PermutationSet,
    tt: u32,
    cfg: &BuildConfig,
) -> Result<Mdp, MdpError> {
    let steps = robot_steps(v, graph, a, p);
    let n = p.robots.len();
    let pos = |r: usize| p.robots.binary_search(&r).ok();

    let mut in_cluster: Vec<usize> = p.orders.iter().flatten().copied().collect();
    in_cluster.sort_unstable();
    in_cluster.dedup();

    let mut participants = HashMap::new();
    for &i in &in_cluster {
        if graph.instance(i).is_joint() {
            let ps: Vec<usize> = a.assignments[i].iter().map(|&r| pos(r).expect("joint task stays in one cluster")).collect();
            participants.insert(i, ps);
        }
    }
    let mut tracked: Vec<usize> = graph
        .precedence
        .iter()
        .filter(|pp| in_cluster.binary_search(&pp.after).is_ok())
        .map(|pp| pp.before)
        .collect();
    tracked.sort_unstable();
    tracked.dedup();
    let slot: HashMap<usize, usize> = tracked.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut preds = HashMap::new();
    for &i in &in_cluster {
        let ps: Vec<usize> = graph.predecessors(i).iter().map(|b| slot[b]).collect();
        if !ps.is_empty() {
            preds.insert(i, ps);
        }
    }
    let max_idle = p.robots.iter().map(|&r| v.max_idle(r).unwrap_or(u32::MAX)).collect();

    let ctx = Ctx { steps: &steps, participants, preds, slot, max_idle, tt, n, semantics: cfg.semantics };

    let width = n * ROBOT_SLOTS + 1 + tracked.len();
    let mut index: HashMap<Box<[u32]>, u32> = HashMap::new();
    let mut states: Vec<Box<[u32]>> = Vec::new();
    let init: Box<[u32]> = vec![0u32; width].into();
    index.insert(init.clone(), 0);
    states.push(init);

    let mut mdp = Mdp::empty();
    let mut overflow = false;
    let mut next = 0usize;
    while next < states.len() {
        let s = states[next].clone();
        let mut intern = |key: Box<[u32]>| -> usize {
            if let Some(&id) = index.get(&key) {
                return id as usize;
            }
            let id = states.len();
            if id >= cfg.state_cap {
                overflow = true;
            }
            index.insert(key.clone(), id as u32);
            states.push(key);
            id
        };
        let all_finished = (0..n).all(|r| ctx.finished(&s, r) && !ctx.failed(&s, r));
        let choices = if all_finished { Vec::new() } else { ctx.successors(&s, &mut intern) };
        if overflow {
            return Err(MdpError::StateExplosion { states: states.len(), cap: cfg.state_cap, cluster_size: n });
        }
        mdp.push_state(choices, all_finished, all_finished && s[ctx.ever_slot()] == 0);
        next += 1;
    }

    mdp.valuations = states;
    mdp.meta = Some(ModelMeta {
        robots: p.robots.clone(),
        robot_names: p.robots.iter().map(|&r| v.robot(r).id.clone()).collect(),
        instance_names: graph.instances().iter().map(|i| i.id.clone()).collect(),
        location_names: (0..v.spec().world.locations.len()).map(|l| v.location(l).id.clone()).collect(),
        steps,
        tracked,
        time_available: tt,
    });
    Ok(mdp)
}
