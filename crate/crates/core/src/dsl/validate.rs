use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::{ValidationError, Violation};

/// Reference to a task definition by kind and position in the task model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TaskRef {
    Atomic(usize),
    Compound(usize),
}

/// A problem whose references all resolve, with a complete symmetric
/// distance table and per-robot constraint lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem {
    spec: ProblemSpec,
    locations: BTreeMap<String, usize>,
    tasks: BTreeMap<String, TaskRef>,
    robots: BTreeMap<String, usize>,
    distances: Vec<Vec<u64>>,
    /// `capability[robot][atomic]` indexes into the robot's capability list.
    capability: Vec<Vec<Option<usize>>>,
    time_available: u32,
    max_idle: Vec<Option<u32>>,
    boundaries: Vec<Vec<Rect>>,
}

impl ValidatedProblem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.get(id).copied()
    }

    pub fn location(&self, idx: usize) -> &Location {
        &self.spec.world.locations[idx]
    }

    pub fn task(&self, id: &str) -> Option<TaskRef> {
        self.tasks.get(id).copied()
    }

    pub fn robot_index(&self, id: &str) -> Option<usize> {
        self.robots.get(id).copied()
    }

    pub fn robot(&self, idx: usize) -> &RobotDef {
        &self.spec.robots[idx]
    }

    pub fn robot_count(&self) -> usize {
        self.spec.robots.len()
    }

    pub fn atomic(&self, idx: usize) -> &AtomicTaskDef {
        &self.spec.tasks.atomic[idx]
    }

    pub fn compound(&self, idx: usize) -> &CompoundTaskDef {
        &self.spec.tasks.compound[idx]
    }

    /// Distance between two locations, symmetric; zero on the diagonal.
    pub fn distance(&self, a: usize, b: usize) -> u64 {
        self.distances[a][b]
    }

    pub fn robot_location(&self, robot: usize) -> usize {
        self.locations[&self.spec.robots[robot].initial_loc]
    }

    /// Time for `robot` to cover the distance between two locations:
    /// `ceil(distance / velocity)`.
    pub fn travel_time(&self, robot: usize, from: usize, to: usize) -> u32 {
        let d = self.distance(from, to);
        let v = self.spec.robots[robot].velocity;
        let num = d as u128 * *v.denom() as u128;
        let den = *v.numer() as u128;
        num.div_ceil(den) as u32
    }

    pub fn capability(&self, robot: usize, atomic: usize) -> Option<&Capability> {
        self.capability[robot][atomic].map(|c| &self.spec.robots[robot].capabilities[c])
    }

    pub fn time_available(&self) -> u32 {
        self.time_available
    }

    pub fn max_idle(&self, robot: usize) -> Option<u32> {
        self.max_idle[robot]
    }

    /// Rectangles the robot must stay inside. Empty when unconstrained.
    pub fn boundaries(&self, robot: usize) -> &[Rect] {
        &self.boundaries[robot]
    }

    /// Whether `robot` may operate at `location` under its boundary constraints.
    pub fn location_allowed(&self, robot: usize, location: usize) -> bool {
        let loc = self.location(location);
        self.boundaries[robot].iter().all(|r| r.contains(loc.x, loc.y))
    }
}

/// Ceiling of the Euclidean distance between two integer points.
pub fn ceil_euclidean(a: (i64, i64), b: (i64, i64)) -> u64 {
    let dx = (a.0 - b.0).unsigned_abs() as u128;
    let dy = (a.1 - b.1).unsigned_abs() as u128;
    let sq = dx * dx + dy * dy;
    let r = sq.isqrt();
    (if r * r == sq { r } else { r + 1 }) as u64
}

fn subject_label(s: &Subject) -> String {
    match s {
        Subject::All => "all".to_string(),
        Subject::Robot(r) => format!("`{r}`"),
    }
}

/// Checks every invariant of a parsed problem and resolves it.
///
/// All violations are collected in source order of the checks below, so the
/// error list is deterministic for a given input.
pub fn validate_problem(spec: ProblemSpec) -> Result<ValidatedProblem, ValidationError> {
    let mut errs: Vec<Violation> = Vec::new();
    let mut err = |span: Span, msg: String| errs.push(Violation { span, message: msg });

    // world
    let mut locations = BTreeMap::new();
    for (i, l) in spec.world.locations.iter().enumerate() {
        if locations.contains_key(&l.id) {
            err(l.span, format!("duplicate location `{}`", l.id));
        } else {
            locations.insert(l.id.clone(), i);
        }
    }
    if spec.world.locations.is_empty() {
        err(Span::new(1, 1), "world declares no locations".into());
    }
    let n = spec.world.locations.len();
    let mut declared: Vec<Vec<Option<u64>>> = vec![vec![None; n]; n];
    for d in &spec.world.distances {
        let (a, b) = (locations.get(&d.from).copied(), locations.get(&d.to).copied());
        if a.is_none() {
            err(d.span, format!("distance refers to unknown location `{}`", d.from));
        }
        if b.is_none() {
            err(d.span, format!("distance refers to unknown location `{}`", d.to));
        }
        let (Some(a), Some(b)) = (a, b) else { continue };
        if a == b {
            err(d.span, format!("distance from `{}` to itself", d.from));
        } else if declared[a][b].is_some() {
            err(d.span, format!("duplicate distance between `{}` and `{}`", d.from, d.to));
        } else {
            declared[a][b] = Some(d.distance);
            declared[b][a] = Some(d.distance);
        }
    }
    let mut distances = vec![vec![0u64; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let (la, lb) = (&spec.world.locations[a], &spec.world.locations[b]);
                distances[a][b] = declared[a][b].unwrap_or_else(|| ceil_euclidean((la.x, la.y), (lb.x, lb.y)));
            }
        }
    }

    // tasks
    let mut tasks = BTreeMap::new();
    for (i, t) in spec.tasks.atomic.iter().enumerate() {
        if tasks.contains_key(&t.id) {
            err(t.span, format!("duplicate task `{}`", t.id));
        } else {
            tasks.insert(t.id.clone(), TaskRef::Atomic(i));
        }
        if t.robots_needed < 1 {
            err(t.span, format!("atomic task `{}` needs at least one robot", t.id));
        }
    }
    for (i, t) in spec.tasks.compound.iter().enumerate() {
        if tasks.contains_key(&t.id) {
            err(t.span, format!("duplicate task `{}`", t.id));
        } else {
            tasks.insert(t.id.clone(), TaskRef::Compound(i));
        }
    }
    let mut references_ok = true;
    for t in &spec.tasks.compound {
        if t.subtasks.is_empty() {
            err(t.span, format!("compound task `{}` has no subtasks", t.id));
        }
        for s in &t.subtasks {
            if !tasks.contains_key(s) {
                err(t.span, format!("compound task `{}` refers to unknown task `{s}`", t.id));
                references_ok = false;
            }
        }
    }
    let mut acyclic = true;
    if references_ok {
        // 0 = unvisited, 1 = on stack, 2 = finished
        let mut colour = vec![0u8; spec.tasks.compound.len()];
        fn visit(c: usize, spec: &ProblemSpec, tasks: &BTreeMap<String, TaskRef>, colour: &mut [u8]) -> bool {
            colour[c] = 1;
            for s in &spec.tasks.compound[c].subtasks {
                if let Some(TaskRef::Compound(d)) = tasks.get(s) {
                    if colour[*d] == 1 || (colour[*d] == 0 && !visit(*d, spec, tasks, colour)) {
                        return false;
                    }
                }
            }
            colour[c] = 2;
            true
        }
        for c in 0..spec.tasks.compound.len() {
            if colour[c] == 0 && !visit(c, &spec, &tasks, &mut colour) {
                let t = &spec.tasks.compound[c];
                err(t.span, format!("cyclic task definition involving `{}`", t.id));
                acyclic = false;
                break;
            }
        }
    }

    // robots
    let mut robots = BTreeMap::new();
    let mut capability = vec![vec![None; spec.tasks.atomic.len()]; spec.robots.len()];
    for (ri, r) in spec.robots.iter().enumerate() {
        if robots.contains_key(&r.id) {
            err(r.span, format!("duplicate robot `{}`", r.id));
        } else {
            robots.insert(r.id.clone(), ri);
        }
        if !locations.contains_key(&r.initial_loc) {
            err(r.span, format!("robot `{}` starts at unknown location `{}`", r.id, r.initial_loc));
        }
        if *r.velocity.numer() == 0 {
            err(r.span, format!("robot `{}` has zero velocity", r.id));
        }
        for (ci, c) in r.capabilities.iter().enumerate() {
            match tasks.get(&c.task) {
                Some(TaskRef::Atomic(a)) => {
                    if capability[ri][*a].is_some() {
                        err(c.span, format!("robot `{}` declares `{}` twice", r.id, c.task));
                    } else {
                        capability[ri][*a] = Some(ci);
                    }
                }
                Some(TaskRef::Compound(_)) => {
                    err(c.span, format!("capability `{}` of robot `{}` is not an atomic task", c.task, r.id))
                }
                None => err(c.span, format!("robot `{}` has capability for unknown task `{}`", r.id, c.task)),
            }
            if c.required_time < 1 {
                err(c.span, format!("required time of `{}` on robot `{}` must be at least 1", c.task, r.id));
            }
            if !(c.success_prob > 0.0 && c.success_prob <= 1.0) {
                err(
                    c.span,
                    format!("success probability {} of `{}` on robot `{}` is outside (0, 1]", c.success_prob, c.task, r.id),
                );
            }
        }
    }
    if spec.robots.is_empty() {
        err(Span::new(1, 1), "no robots declared".into());
    }

    // mission
    if spec.mission.tasks.is_empty() {
        err(Span::new(1, 1), "mission has no tasks".into());
    }
    for m in &spec.mission.tasks {
        if !tasks.contains_key(&m.task) {
            err(m.span, format!("mission refers to unknown task `{}`", m.task));
        }
        if !locations.contains_key(&m.location) {
            err(m.span, format!("mission refers to unknown location `{}`", m.location));
        }
    }
    let mut time_available = None;
    let mut max_idle = vec![None::<u32>; spec.robots.len()];
    let mut boundaries = vec![Vec::new(); spec.robots.len()];
    let subject_robots = |s: &Subject| -> Option<Vec<usize>> {
        match s {
            Subject::All => Some((0..spec.robots.len()).collect()),
            Subject::Robot(id) => robots.get(id).map(|r| vec![*r]),
        }
    };
    for c in &spec.mission.constraints {
        match c {
            ConstraintSpec::TimeAvailable { budget, span } => {
                if time_available.is_some() {
                    err(*span, "more than one `time` constraint".into());
                }
                if *budget < 1 {
                    err(*span, "time available must be at least 1".into());
                }
                time_available.get_or_insert(*budget);
            }
            ConstraintSpec::Boundary { subject, rect, span } => {
                if !rect.is_well_formed() {
                    err(*span, format!("boundary for {} has min greater than max", subject_label(subject)));
                }
                match subject_robots(subject) {
                    Some(rs) => rs.into_iter().for_each(|r| boundaries[r].push(*rect)),
                    None => err(*span, format!("boundary refers to unknown robot {}", subject_label(subject))),
                }
            }
            ConstraintSpec::MaxIdle { subject, budget, span } => {
                if *budget < 1 {
                    err(*span, "idle budget must be at least 1".into());
                }
                match subject_robots(subject) {
                    Some(rs) => {
                        for r in rs {
                            max_idle[r] = Some(max_idle[r].map_or(*budget, |b: u32| b.min(*budget)));
                        }
                    }
                    None => err(*span, format!("idle limit refers to unknown robot {}", subject_label(subject))),
                }
            }
        }
    }
    if time_available.is_none() {
        err(spec.mission.span, "mission is missing the `time` constraint".into());
    }

    // every atomic task reachable from the mission needs enough capable robots
    if references_ok && acyclic {
        let mut reachable = BTreeSet::new();
        let mut stack: Vec<&str> = spec.mission.tasks.iter().map(|m| m.task.as_str()).collect();
        while let Some(t) = stack.pop() {
            match tasks.get(t) {
                Some(TaskRef::Atomic(a)) => {
                    reachable.insert(*a);
                }
                Some(TaskRef::Compound(c)) => stack.extend(spec.tasks.compound[*c].subtasks.iter().map(|s| s.as_str())),
                None => {}
            }
        }
        for a in reachable {
            let t = &spec.tasks.atomic[a];
            let capable = capability.iter().filter(|row| row[a].is_some()).count();
            if capable < t.robots_needed as usize {
                err(
                    t.span,
                    format!("atomic task `{}` needs {} robot(s) but only {capable} can do it", t.id, t.robots_needed),
                );
            }
        }
    }

    if !errs.is_empty() {
        return Err(ValidationError(errs));
    }
    Ok(ValidatedProblem {
        time_available: time_available.expect("checked above"),
        spec,
        locations,
        tasks,
        robots,
        distances,
        capability,
        max_idle,
        boundaries,
    })
}
