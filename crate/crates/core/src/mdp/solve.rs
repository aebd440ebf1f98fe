use super::model::{Choice, Mdp};
use super::MdpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Done,
    Success,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reward {
    Travel,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Backward induction when the model is acyclic, value iteration otherwise.
    #[default]
    Auto,
    ValueIteration,
}

/// Deterministic memoryless policy: a choice index per state, `None` where
/// no choice is taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy(pub Vec<Option<usize>>);

#[derive(Debug, Clone)]
pub struct Solution {
    pub values: Vec<f64>,
    pub policy: Policy,
}

impl Solution {
    pub fn initial(&self) -> f64 {
        self.values[0]
    }
}

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000_000;

pub fn labelled(m: &Mdp, label: Label) -> &[bool] {
    match label {
        Label::Done => &m.done,
        Label::Success => &m.success,
    }
}

fn reward_of(c: &Choice, r: Reward) -> f64 {
    match r {
        Reward::Travel => c.travel as f64,
        Reward::Idle => c.idle as f64,
    }
}

/// `sum p_i v_i` written as `v_0 + sum p_i (v_i - v_0)`, so a distribution
/// whose successors share one value reproduces that value exactly.
fn expectation(m: &Mdp, c: &Choice, values: &[f64]) -> f64 {
    let bs = m.branches(c);
    let base = values[bs[0].0 as usize];
    base + bs[1..].iter().map(|&(s, p)| p * (values[s as usize] - base)).sum::<f64>()
}

/// States in an order where every successor comes after its predecessor,
/// or `None` when the model has a cycle.
pub fn topological_order(m: &Mdp) -> Option<Vec<usize>> {
    let n = m.num_states();
    let mut indeg = vec![0u32; n];
    for s in 0..n {
        for c in m.choices(s) {
            for &(t, _) in m.branches(c) {
                indeg[t as usize] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&s| indeg[s] == 0).collect();
    let mut head = 0;
    while head < order.len() {
        let s = order[head];
        head += 1;
        for c in m.choices(s) {
            for &(t, _) in m.branches(c) {
                indeg[t as usize] -= 1;
                if indeg[t as usize] == 0 {
                    order.push(t as usize);
                }
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Maximal probability of eventually reaching `label`, with an optimal policy.
pub fn max_reach(m: &Mdp, label: Label, method: Method) -> Result<Solution, MdpError> {
    let target = labelled(m, label);
    let n = m.num_states();
    let mut values: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let mut policy = vec![None; n];
    let order = if method == Method::Auto { topological_order(m) } else { None };

    let best = |s: usize, values: &[f64]| -> (f64, Option<usize>) {
        let mut out = (0.0, None);
        for (k, c) in m.choices(s).iter().enumerate() {
            let v = expectation(m, c, values);
            if out.1.is_none() || v > out.0 {
                out = (v, Some(k));
            }
        }
        out
    };

    if let Some(order) = order {
        for &s in order.iter().rev() {
            if !target[s] {
                (values[s], policy[s]) = best(s, &values);
            }
        }
    } else {
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            residual = 0.0;
            for s in 0..n {
                if target[s] {
                    continue;
                }
                let (v, k) = best(s, &values);
                residual = f64::max(residual, (v - values[s]).abs());
                values[s] = v;
                policy[s] = k;
            }
            if residual <= 1e-12 {
                break;
            }
        }
        if residual > TOLERANCE {
            return Err(MdpError::NonConvergence { residual });
        }
    }
    Ok(Solution { values, policy: Policy(policy) })
}

pub fn max_reach_probability(m: &Mdp, label: Label) -> Result<f64, MdpError> {
    max_reach(m, label, Method::Auto).map(|s| s.initial())
}

/// States from which some policy reaches `label` with probability 1.
pub fn prob1_exists(m: &Mdp, label: Label) -> Vec<bool> {
    let target = labelled(m, label);
    let n = m.num_states();
    if let Some(order) = topological_order(m) {
        let mut ok = target.to_vec();
        for &s in order.iter().rev() {
            if !ok[s] {
                ok[s] = m.choices(s).iter().any(|c| m.branches(c).iter().all(|&(t, _)| ok[t as usize]));
            }
        }
        return ok;
    }
    let mut u = vec![true; n];
    loop {
        let mut r = target.to_vec();
        loop {
            let mut changed = false;
            for s in 0..n {
                if r[s] {
                    continue;
                }
                let grows = m.choices(s).iter().any(|c| {
                    let bs = m.branches(c);
                    bs.iter().all(|&(t, _)| u[t as usize]) && bs.iter().any(|&(t, _)| r[t as usize])
                });
                if grows {
                    r[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if r == u {
            return u;
        }
        u = r;
    }
}

/// Minimal expected accumulated reward until `label`, over policies that
/// reach `label` almost surely.
pub fn min_expected_reward(m: &Mdp, reward: Reward, label: Label, method: Method) -> Result<Solution, MdpError> {
    let target = labelled(m, label);
    let safe = prob1_exists(m, label);
    if !safe[0] {
        return Err(MdpError::Undefined);
    }
    let n = m.num_states();
    let mut values = vec![f64::INFINITY; n];
    let mut policy = vec![None; n];
    for s in 0..n {
        if target[s] {
            values[s] = 0.0;
        }
    }
    let allowed = |c: &Choice| m.branches(c).iter().all(|&(t, _)| safe[t as usize]);
    let best = |s: usize, values: &[f64]| -> (f64, Option<usize>) {
        let mut out = (f64::INFINITY, None);
        for (k, c) in m.choices(s).iter().enumerate() {
            if !allowed(c) {
                continue;
            }
            let v = reward_of(c, reward) + expectation(m, c, values);
            if out.1.is_none() || v < out.0 {
                out = (v, Some(k));
            }
        }
        out
    };

    let order = if method == Method::Auto { topological_order(m) } else { None };
    if let Some(order) = order {
        for &s in order.iter().rev() {
            if safe[s] && !target[s] {
                (values[s], policy[s]) = best(s, &values);
            }
        }
    } else {
        for s in 0..n {
            if safe[s] && !target[s] {
                values[s] = 0.0;
            }
        }
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            residual = 0.0;
            for s in 0..n {
                if !safe[s] || target[s] {
                    continue;
                }
                let (v, k) = best(s, &values);
                residual = f64::max(residual, (v - values[s]).abs());
                values[s] = v;
                policy[s] = k;
            }
            if residual <= 1e-12 {
                break;
            }
        }
        if residual > TOLERANCE {
            return Err(MdpError::NonConvergence { residual });
        }
    }
    Ok(Solution { values, policy: Policy(policy) })
}

/// Expected accumulated reward until `label` under a fixed policy; states
/// where the policy stops outside `label` contribute nothing further.
pub fn policy_reward(m: &Mdp, policy: &Policy, reward: Reward, label: Label) -> Result<f64, MdpError> {
    let target = labelled(m, label);
    let order = topological_order(m).ok_or(MdpError::NonConvergence { residual: f64::INFINITY })?;
    let mut values = vec![0.0; m.num_states()];
    for &s in order.iter().rev() {
        if target[s] {
            continue;
        }
        if let Some(k) = policy.0[s] {
            let c = &m.choices(s)[k];
            values[s] = reward_of(c, reward) + expectation(m, c, &values);
        }
    }
    Ok(values[0])
}
