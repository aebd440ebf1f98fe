//! Enumeration of capability-feasible allocations.
//!
//! The feasible set is a product: each instance independently picks a
//! `robots_needed`-subset of the robots able (and, with boundary filtering,
//! allowed) to perform it. Allocations are ordered lexicographically over
//! instances in mission order, each instance's subsets ordered as sorted
//! robot-index tuples.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::dsl::ValidatedProblem;
use crate::tasks::TaskInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub index: usize,
    /// Sorted robot indices per instance, indexed like the instance list.
    pub assignments: Vec<Vec<usize>>,
    pub used_robots: BTreeSet<usize>,
}

impl Allocation {
    fn from_assignments(index: usize, assignments: Vec<Vec<usize>>) -> Self {
        let used_robots = assignments.iter().flatten().copied().collect();
        Allocation { index, assignments, used_robots }
    }

    pub fn robots_of(&self, instance: usize) -> &[usize] {
        &self.assignments[instance]
    }

    /// Instances assigned to `robot`, in instance order.
    pub fn instances_of(&self, robot: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i].contains(&robot)).collect()
    }

    /// `instanceId -> sorted robot ids` view.
    pub fn to_named(&self, problem: &ValidatedProblem, instances: &[TaskInstance]) -> NamedAllocation {
        NamedAllocation {
            index: self.index,
            assignments: self
                .assignments
                .iter()
                .enumerate()
                .map(|(i, rs)| {
                    let mut ids: Vec<String> = rs.iter().map(|&r| problem.robot(r).id.clone()).collect();
                    ids.sort();
                    (instances[i].id.clone(), ids)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedAllocation {
    pub index: usize,
    pub assignments: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocatorConfig {
    pub max_allocations: usize,
    pub boundary_filter: bool,
}

impl Default for AllocatorConfig {
    fn default() -> Self {
        AllocatorConfig { max_allocations: 30, boundary_filter: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocError {
    #[error("instance `{instance}` needs {needed} robot(s) but only {available} are capable and allowed")]
    InfeasibleAllocation { instance: String, needed: u32, available: usize },
    #[error("the allocation limit must be at least 1")]
    ZeroLimit,
}

/// All `k`-subsets of `items`, in lexicographic order.
pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(items, k, 0, &mut cur, &mut out);
    out
}

/// Robots holding a capability for the instance's type, optionally
/// restricted to those whose boundaries admit its location.
pub fn capable_robots(problem: &ValidatedProblem, inst: &TaskInstance, boundary_filter: bool) -> Vec<usize> {
    (0..problem.robot_count())
        .filter(|&r| problem.capability(r, inst.atomic).is_some())
        .filter(|&r| !boundary_filter || problem.location_allowed(r, inst.location))
        .collect()
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of feasible allocations: product of `C(capable, needed)` over instances.
pub fn count_feasible(problem: &ValidatedProblem, instances: &[TaskInstance]) -> BigUint {
    instances
        .iter()
        .map(|i| binomial(capable_robots(problem, i, false).len(), i.robots_needed as usize))
        .product()
}

/// The feasible allocation space with lexicographic indexing.
#[derive(Debug, Clone)]
pub struct AllocationSpace {
    choices: Vec<Vec<Vec<usize>>>,
}

impl AllocationSpace {
    pub fn new(
        problem: &ValidatedProblem,
        instances: &[TaskInstance],
        boundary_filter: bool,
    ) -> Result<Self, AllocError> {
        let mut choices = Vec::with_capacity(instances.len());
        for inst in instances {
            let capable = capable_robots(problem, inst, boundary_filter);
            if capable.len() < inst.robots_needed as usize {
                return Err(AllocError::InfeasibleAllocation {
                    instance: inst.id.clone(),
                    needed: inst.robots_needed,
                    available: capable.len(),
                });
            }
            choices.push(combinations(&capable, inst.robots_needed as usize));
        }
        Ok(AllocationSpace { choices })
    }

    pub fn count(&self) -> BigUint {
        self.choices.iter().map(|c| BigUint::from(c.len())).product()
    }

    /// Candidate robot sets of one instance.
    pub fn choices(&self, instance: usize) -> &[Vec<usize>] {
        &self.choices[instance]
    }

    /// The allocation at a lexicographic position (last instance varies fastest).
    pub fn nth(&self, position: &BigUint) -> Option<Vec<Vec<usize>>> {
        if *position >= self.count() {
            return None;
        }
        let mut rest = position.clone();
        let mut digits = vec![0usize; self.choices.len()];
        for (i, c) in self.choices.iter().enumerate().rev() {
            let base = BigUint::from(c.len());
            digits[i] = (&rest % &base).to_usize().expect("digit below radix");
            rest /= base;
        }
        Some(digits.iter().enumerate().map(|(i, &d)| self.choices[i][d].clone()).collect())
    }

    /// Depth-first walk over the space in lexicographic order.
    pub fn iter(&self) -> Backtrack<'_> {
        Backtrack { space: self, digits: vec![0; self.choices.len()], exhausted: false }
    }
}

/// Backtracking enumerator: advances the deepest instance that still has an
/// untried robot set and resets everything after it.
pub struct Backtrack<'a> {
    space: &'a AllocationSpace,
    digits: Vec<usize>,
    exhausted: bool,
}

impl Iterator for Backtrack<'_> {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.exhausted {
            return None;
        }
        let current = self.digits.iter().enumerate().map(|(i, &d)| self.space.choices[i][d].clone()).collect();
        let mut level = self.digits.len();
        loop {
            if level == 0 {
                self.exhausted = true;
                break;
            }
            level -= 1;
            self.digits[level] += 1;
            if self.digits[level] < self.space.choices[level].len() {
                break;
            }
            self.digits[level] = 0;
        }
        Some(current)
    }
}

/// Up to `max_allocations` distinct feasible allocations.
///
/// When the space is larger than the limit, positions `0, k, 2k, ...` with
/// stride `k = floor(total / limit)` are taken so the sample spans the space.
pub fn enumerate_allocations(
    problem: &ValidatedProblem,
    instances: &[TaskInstance],
    cfg: &AllocatorConfig,
) -> Result<Vec<Allocation>, AllocError> {
    if cfg.max_allocations == 0 {
        return Err(AllocError::ZeroLimit);
    }
    let space = AllocationSpace::new(problem, instances, cfg.boundary_filter)?;
    let total = space.count();
    let limit = BigUint::from(cfg.max_allocations);
    let raw: Vec<Vec<Vec<usize>>> = if total <= limit {
        space.iter().collect()
    } else {
        let stride = &total / &limit;
        (0..cfg.max_allocations)
            .map(|i| space.nth(&(&stride * BigUint::from(i))).expect("position below total"))
            .collect()
    };
    Ok(raw.into_iter().enumerate().map(|(i, a)| Allocation::from_assignments(i, a)).collect())
}
