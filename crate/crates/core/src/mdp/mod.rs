//! Scheduling of one robot cluster as an explicit-state MDP.
//!
//! Each robot runs its permuted task list as a small program. A state holds,
//! per robot, the program counter, clock, idle time used and a failure flag,
//! plus completion times of tasks other robots wait on. Failures cost the
//! same time as a success and are followed by a recovery step, so the
//! clocks do not depend on luck and the model is acyclic.

mod build;
mod export;
mod model;
mod perm;
mod plan;
mod solve;

pub use build::{build_mdp, robot_steps, BuildConfig, Semantics};
pub use export::dump_mdp;
pub use model::{Action, Choice, Mdp, ModelMeta, RawChoice, RobotState, Step, StepKind};
pub use perm::{
    random_robot_order, random_task_permutation, random_task_permutation_with, success_probability, travel_cost,
    PermutationSet,
};
pub use plan::{extract_plan, Event, Plan, PlanViolation, Timeline};
pub use solve::{
    labelled, max_reach, max_reach_probability, min_expected_reward, policy_reward, prob1_exists, topological_order,
    Label, Method, Policy, Reward, Solution,
};

use crate::alloc::Allocation;
use crate::dsl::ValidatedProblem;
use crate::tasks::TaskGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MdpError {
    #[error("state space exceeded {cap} states ({states} generated) for a cluster of {cluster_size} robot(s)")]
    StateExplosion { states: usize, cap: usize, cluster_size: usize },
    #[error("value iteration did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("the target label is not reached almost surely")]
    Undefined,
}

#[derive(Debug, Clone)]
pub struct SchedulingResult {
    pub feasible: bool,
    pub p_success: f64,
    /// Minimal expected idle time.
    pub idle: f64,
    /// Expected travel under the idle-optimal policy.
    pub travel: f64,
    pub plan: Option<Plan>,
    pub states: usize,
}

/// Builds and solves the model of one cluster under a permutation.
pub fn schedule(
    v: &ValidatedProblem,
    graph: &TaskGraph,
    a: &Allocation,
    p: &PermutationSet,
    cfg: &BuildConfig,
) -> Result<SchedulingResult, MdpError> {
    let m = build_mdp(v, graph, a, p, v.time_available(), cfg)?;
    schedule_model(&m)
}

/// Feasibility, objectives and plan of an already built model.
pub fn schedule_model(m: &Mdp) -> Result<SchedulingResult, MdpError> {
    let reach = max_reach_probability(m, Label::Done)?;
    if reach < 1.0 - 1e-12 {
        return Ok(SchedulingResult {
            feasible: false,
            p_success: 0.0,
            idle: 0.0,
            travel: 0.0,
            plan: None,
            states: m.num_states(),
        });
    }
    let idle = min_expected_reward(m, Reward::Idle, Label::Done, Method::Auto)?;
    let travel = policy_reward(m, &idle.policy, Reward::Travel, Label::Done)?;
    let p_success = max_reach_probability(m, Label::Success)?;
    let plan = extract_plan(m, &idle.policy);
    Ok(SchedulingResult {
        feasible: true,
        p_success,
        idle: idle.initial(),
        travel,
        plan: Some(plan),
        states: m.num_states(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::{enumerate_allocations, AllocatorConfig};
    use crate::cluster::cluster_allocation;
    use crate::dsl::load_problem;

    struct Fixture {
        v: ValidatedProblem,
        g: TaskGraph,
        a: Allocation,
    }

    fn fixture(src: &str) -> Fixture {
        let v = load_problem(src).unwrap();
        let g = TaskGraph::new(&v);
        let a = enumerate_allocations(&v, g.instances(), &AllocatorConfig::default()).unwrap().remove(0);
        Fixture { v, g, a }
    }

    fn in_order(f: &Fixture) -> PermutationSet {
        let robots: Vec<usize> = f.a.used_robots.iter().copied().collect();
        let orders = robots.iter().map(|&r| f.a.instances_of(r)).collect();
        PermutationSet { robots, orders }
    }

    fn cfg(semantics: Semantics) -> BuildConfig {
        BuildConfig { semantics, ..BuildConfig::default() }
    }

    const ONE_TASK: &str = "world { loc a (0,0); loc b (2,0) }\n\
        tasks { atomic t needs 1 }\n\
        robots { robot r at a velocity 1 { can t time 3 prob 1 } }\n\
        mission { do t at b; time TT }";

    #[test]
    fn single_task_single_path() {
        let f = fixture(&ONE_TASK.replace("TT", "10"));
        let p = in_order(&f);
        let m = build_mdp(&f.v, &f.g, &f.a, &p, 10, &cfg(Semantics::Reduced)).unwrap();
        assert_eq!(m.num_states(), 2);
        assert!(m.done[1] && m.success[1]);
        assert_eq!(m.robot_state(1, 0).time, 5);
        // with free idling: order 0 at clocks 0..=10 and order 1 at clocks 5..=10
        let full = build_mdp(&f.v, &f.g, &f.a, &p, 10, &cfg(Semantics::Full)).unwrap();
        assert_eq!(full.num_states(), 11 + 6);
        assert_eq!(max_reach_probability(&full, Label::Done).unwrap(), 1.0);
        let r = schedule_model(&m).unwrap();
        assert_eq!((r.idle, r.travel, r.p_success), (0.0, 2.0, 1.0));
        let plan = r.plan.unwrap();
        assert_eq!(
            plan.timelines[0].events,
            vec![
                Event::Travel { from: "a".into(), to: "b".into(), start: 0, end: 2 },
                Event::Execute { instance: "t_0".into(), start: 2, end: 5 },
            ]
        );
    }

    #[test]
    fn budget_below_travel_is_infeasible() {
        let src = "world { loc a (0,0); loc b (6,0) }\n\
            tasks { atomic t needs 1 }\n\
            robots { robot r at a velocity 1 { can t time 1 prob 1 } }\n\
            mission { do t at b; time TT }";
        for sem in [Semantics::Reduced, Semantics::Full] {
            let f = fixture(&src.replace("TT", "5"));
            let m = build_mdp(&f.v, &f.g, &f.a, &in_order(&f), 5, &cfg(sem)).unwrap();
            assert!(!m.done.iter().any(|&d| d));
            assert_eq!(max_reach_probability(&m, Label::Done).unwrap(), 0.0);
            let f = fixture(&src.replace("TT", "7"));
            let m = build_mdp(&f.v, &f.g, &f.a, &in_order(&f), 7, &cfg(sem)).unwrap();
            assert_eq!(max_reach_probability(&m, Label::Done).unwrap(), 1.0);
        }
    }

    const JOINT: &str = "world { loc a (0,0); loc b (5,0); loc j (8,0) }\n\
        tasks { atomic lift needs 2 }\n\
        robots {\n\
          robot r1 at b velocity 1 { can lift time 2 prob 0.9 }\n\
          robot r2 at a velocity 1 { can lift time 4 prob 0.8 }\n\
        }\n\
        mission { do lift at j; time 20 }";

    #[test]
    fn early_partner_idles_until_sync() {
        let f = fixture(JOINT);
        let p = in_order(&f);
        for sem in [Semantics::Reduced, Semantics::Full] {
            let m = build_mdp(&f.v, &f.g, &f.a, &p, 20, &cfg(sem)).unwrap();
            let r = schedule_model(&m).unwrap();
            assert!(r.feasible);
            // r1 arrives at 3, r2 at 8
            assert_eq!(r.idle, 5.0);
            assert_eq!(r.travel, 11.0);
            assert!((r.p_success - 0.72).abs() < 1e-12);
            let plan = r.plan.unwrap();
            plan.verify(&f.v, &f.g).unwrap();
            let sync = |k: usize| plan.timelines[k].events.last().unwrap().clone();
            assert_eq!(sync(0), Event::JointSync { instance: "lift_0".into(), start: 8, end: 12 });
            assert_eq!(sync(0).span(), sync(1).span());
        }
    }

    #[test]
    fn idle_limit_can_break_synchrony() {
        let f = fixture(&JOINT.replace("time 20", "time 20; maxidle r1 4"));
        let m = build_mdp(&f.v, &f.g, &f.a, &in_order(&f), 20, &BuildConfig::default()).unwrap();
        assert_eq!(max_reach_probability(&m, Label::Done).unwrap(), 0.0);
    }

    #[test]
    fn precedence_across_robots_waits_for_completion() {
        let src = "world { loc a (0,0); loc b (1,0) }\n\
            tasks { atomic first needs 1; atomic second needs 1; compound both ordered { first, second } }\n\
            robots {\n\
              robot r1 at a velocity 1 { can first time 6 prob 0.5 }\n\
              robot r2 at a velocity 1 { can second time 1 prob 1 }\n\
            }\n\
            mission { do both at b; time 30 }";
        let f = fixture(src);
        let clusters = cluster_allocation(&f.a, &f.g.subtrees);
        assert_eq!(clusters.len(), 1);
        let r = schedule(&f.v, &f.g, &f.a, &in_order(&f), &BuildConfig::default()).unwrap();
        // first ends at 7; r2 departs then and idles 7 steps
        assert_eq!(r.idle, 7.0);
        assert_eq!(r.p_success, 0.5);
        let plan = r.plan.unwrap();
        plan.verify(&f.v, &f.g).unwrap();
        assert_eq!(plan.makespan(), 9);
    }

    #[test]
    fn distributions_are_normalised_and_dump_lists_labels() {
        let f = fixture(JOINT);
        let m = build_mdp(&f.v, &f.g, &f.a, &in_order(&f), 20, &BuildConfig::default()).unwrap();
        assert!(m.max_distribution_error() < 1e-12);
        let text = dump_mdp(&m);
        assert!(text.contains("sync_lift_0 0.7"));
        assert!(text.lines().any(|l| l.starts_with("done: ")));
    }

    #[test]
    fn state_cap_is_enforced() {
        let f = fixture(JOINT);
        let small = BuildConfig { state_cap: 3, semantics: Semantics::Full };
        let err = build_mdp(&f.v, &f.g, &f.a, &in_order(&f), 20, &small).unwrap_err();
        assert!(matches!(err, MdpError::StateExplosion { cap: 3, cluster_size: 2, .. }));
    }
}
