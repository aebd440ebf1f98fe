use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alloc::Allocation;
use crate::cluster::RobotCluster;
use crate::dsl::ValidatedProblem;
use crate::tasks::TaskInstance;

/// Per-robot execution order of assigned instances.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PermutationSet {
    /// Robot indices, ascending.
    pub robots: Vec<usize>,
    /// `orders[k]` is the task order of `robots[k]`.
    pub orders: Vec<Vec<usize>>,
}

impl PermutationSet {
    pub fn order_of(&self, robot: usize) -> Option<&[usize]> {
        self.robots.binary_search(&robot).ok().map(|k| self.orders[k].as_slice())
    }

    /// The orders of a subset of robots (which must all be present).
    pub fn restrict(&self, robots: &[usize]) -> PermutationSet {
        let orders = robots.iter().map(|&r| self.order_of(r).expect("robot in permutation").to_vec()).collect();
        PermutationSet { robots: robots.to_vec(), orders }
    }

    /// Checks that each order lists exactly the robot's instances and respects `closure`.
    pub fn is_valid_for(&self, a: &Allocation, closure: &[Vec<bool>]) -> bool {
        self.robots.iter().zip(&self.orders).all(|(&r, order)| {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            sorted == a.instances_of(r)
                && order.iter().enumerate().all(|(i, &x)| order[..i].iter().all(|&y| !closure[x][y]))
        })
    }
}

/// Random order of one robot's instances compatible with `closure`:
/// repeatedly picks uniformly among the instances whose predecessors are placed.
pub fn random_robot_order<R: Rng>(instances: &[usize], closure: &[Vec<bool>], rng: &mut R) -> Vec<usize> {
    let mut left: Vec<usize> = instances.to_vec();
    let mut out = Vec::with_capacity(left.len());
    while !left.is_empty() {
        let ready: Vec<usize> =
            (0..left.len()).filter(|&i| left.iter().all(|&other| !closure[other][left[i]])).collect();
        let &pick = ready.choose(rng).expect("precedence is acyclic");
        out.push(left.remove(pick));
    }
    out
}

pub fn random_task_permutation_with<R: Rng>(
    a: &Allocation,
    c: &RobotCluster,
    closure: &[Vec<bool>],
    rng: &mut R,
) -> PermutationSet {
    let orders = c.robots.iter().map(|&r| random_robot_order(&a.instances_of(r), closure, rng)).collect();
    PermutationSet { robots: c.robots.clone(), orders }
}

pub fn random_task_permutation(a: &Allocation, c: &RobotCluster, closure: &[Vec<bool>], seed: u64) -> PermutationSet {
    random_task_permutation_with(a, c, closure, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Sum over robots of hop distances from the initial location through every task location.
pub fn travel_cost(p: &PermutationSet, v: &ValidatedProblem, instances: &[TaskInstance]) -> u64 {
    p.robots
        .iter()
        .zip(&p.orders)
        .map(|(&r, order)| {
            let mut at = v.robot_location(r);
            let mut sum = 0;
            for &i in order {
                let to = instances[i].location;
                if to != at {
                    sum += v.distance(at, to);
                    at = to;
                }
            }
            sum
        })
        .sum()
}

/// Probability that every execution in the cluster succeeds.
pub fn success_probability(
    v: &ValidatedProblem,
    instances: &[TaskInstance],
    a: &Allocation,
    c: &RobotCluster,
) -> f64 {
    c.instances
        .iter()
        .flat_map(|&i| a.assignments[i].iter().map(move |&r| (r, i)))
        .map(|(r, i)| v.capability(r, instances[i].atomic).expect("assigned robot is capable").success_prob)
        .product()
}
