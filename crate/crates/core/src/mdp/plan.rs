use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::dsl::ValidatedProblem;
use crate::tasks::TaskGraph;

use super::model::{Action, Mdp, StepKind};
use super::solve::Policy;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Travel { from: String, to: String, start: u32, end: u32 },
    Execute { instance: String, start: u32, end: u32 },
    Idle { start: u32, end: u32 },
    JointSync { instance: String, start: u32, end: u32 },
}

impl Event {
    pub fn span(&self) -> (u32, u32) {
        match *self {
            Event::Travel { start, end, .. }
            | Event::Execute { start, end, .. }
            | Event::Idle { start, end }
            | Event::JointSync { start, end, .. } => (start, end),
        }
    }

    /// The instance this event executes, if any.
    pub fn instance(&self) -> Option<&str> {
        match self {
            Event::Execute { instance, .. } | Event::JointSync { instance, .. } => Some(instance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub robot: String,
    pub events: Vec<Event>,
}

impl Timeline {
    pub fn end(&self) -> u32 {
        self.events.last().map_or(0, |e| e.span().1)
    }

    pub fn idle_time(&self) -> u32 {
        self.events.iter().filter(|e| matches!(e, Event::Idle { .. })).map(|e| e.span().1 - e.span().0).sum()
    }
}

/// Timed schedule: one timeline per robot, in robot declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub timelines: Vec<Timeline>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct PlanViolation(pub String);

impl Plan {
    /// Joins plans of disjoint robot sets, ordering lanes by robot declaration order.
    pub fn merge(v: &ValidatedProblem, plans: impl IntoIterator<Item = Plan>) -> Plan {
        let mut timelines: Vec<Timeline> = plans.into_iter().flat_map(|p| p.timelines).collect();
        timelines.sort_by_key(|t| v.robot_index(&t.robot));
        Plan { timelines }
    }

    pub fn makespan(&self) -> u32 {
        self.timelines.iter().map(Timeline::end).max().unwrap_or(0)
    }

    /// Checks contiguity, joint synchrony, precedence, the time budget and idle limits.
    pub fn verify(&self, v: &ValidatedProblem, graph: &TaskGraph) -> Result<(), PlanViolation> {
        let fail = |msg: String| Err(PlanViolation(msg));
        let mut starts: HashMap<&str, Vec<u32>> = HashMap::new();
        let mut ends: HashMap<&str, u32> = HashMap::new();
        for tl in &self.timelines {
            let Some(r) = v.robot_index(&tl.robot) else {
                return fail(format!("unknown robot `{}`", tl.robot));
            };
            let mut clock = 0;
            for e in &tl.events {
                let (s, t) = e.span();
                if s != clock || t < s {
                    return fail(format!("{}: event at {s}..{t} does not follow {clock}", tl.robot));
                }
                if t > v.time_available() {
                    return fail(format!("{}: event ends at {t}, after the time budget", tl.robot));
                }
                if let Some(i) = e.instance() {
                    starts.entry(i).or_default().push(s);
                    ends.insert(i, t);
                }
                clock = t;
            }
            if let Some(limit) = v.max_idle(r) {
                if tl.idle_time() > limit {
                    return fail(format!("{} idles {} > {limit}", tl.robot, tl.idle_time()));
                }
            }
        }
        for (inst, ss) in &starts {
            if ss.iter().any(|&s| s != ss[0]) {
                return fail(format!("participants of `{inst}` start at different times"));
            }
        }
        for p in &graph.precedence {
            let (b, a) = (&graph.instance(p.before).id, &graph.instance(p.after).id);
            if let (Some(&end), Some(st)) = (ends.get(b.as_str()), starts.get(a.as_str())) {
                if end > st[0] {
                    return fail(format!("`{b}` ends at {end} after `{a}` starts at {}", st[0]));
                }
            }
        }
        Ok(())
    }

    /// Instance id to the robots executing it.
    pub fn executions(&self) -> BTreeMap<String, Vec<String>> {
        let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for tl in &self.timelines {
            for e in &tl.events {
                if let Some(i) = e.instance() {
                    out.entry(i.to_string()).or_default().push(tl.robot.clone());
                }
            }
        }
        out
    }
}

fn push_idle(events: &mut Vec<Event>, start: u32) {
    if let Some(Event::Idle { end, .. }) = events.last_mut() {
        if *end == start {
            *end += 1;
            return;
        }
    }
    events.push(Event::Idle { start, end: start + 1 });
}

/// Follows the success branch of `policy` from the initial state until the
/// model reports done. Requires a model built with metadata.
pub fn extract_plan(m: &Mdp, policy: &Policy) -> Plan {
    let meta = m.meta.as_ref().expect("model carries metadata");
    let n = meta.robots.len();
    let mut events: Vec<Vec<Event>> = vec![Vec::new(); n];
    let loc = |l: usize| meta.location_names[l].clone();
    let mut s = m.initial();
    while !m.done[s] {
        let Some(k) = policy.0[s] else { break };
        let c = &m.choices(s)[k];
        match c.action {
            Action::Task { robot, step } | Action::JointTravel { robot, step } => {
                let st = &meta.steps[robot][step];
                let t0 = m.robot_state(s, robot).time;
                if st.travel_time > 0 {
                    events[robot].push(Event::Travel {
                        from: loc(st.from),
                        to: loc(st.to),
                        start: t0,
                        end: t0 + st.travel_time,
                    });
                }
                if st.kind == StepKind::Task {
                    events[robot].push(Event::Execute {
                        instance: meta.instance_names[st.instance].clone(),
                        start: t0 + st.travel_time,
                        end: t0 + st.duration(),
                    });
                }
            }
            Action::JointSync { instance } => {
                for (r, ev) in events.iter_mut().enumerate() {
                    let rs = m.robot_state(s, r);
                    let Some(st) = meta.steps[r].get(rs.order as usize) else { continue };
                    if st.kind == StepKind::JointSync && st.instance == instance {
                        ev.push(Event::JointSync {
                            instance: meta.instance_names[instance].clone(),
                            start: rs.time,
                            end: rs.time + st.exec_time,
                        });
                    }
                }
            }
            Action::Idle { robot } => push_idle(&mut events[robot], m.robot_state(s, robot).time),
            Action::Recover { .. } | Action::Other(_) => {}
        }
        s = m.branches(c)[0].0 as usize;
    }
    Plan {
        timelines: meta
            .robot_names
            .iter()
            .zip(events)
            .map(|(name, events)| Timeline { robot: name.clone(), events })
            .collect(),
    }
}
