use serde::Serialize;

/// Action label of one nondeterministic choice. Robot fields are positions
/// within the cluster, not global robot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Action {
    /// Travel to the next task location and execute it.
    Task { robot: usize, step: usize },
    /// Solo travel towards a joint task.
    JointTravel { robot: usize, step: usize },
    /// Synchronised execution of a joint instance by all participants.
    JointSync { instance: usize },
    Idle { robot: usize },
    Recover { robot: usize },
    /// Unlabelled choice, for hand-built models.
    Other(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StepKind {
    Task,
    JointTravel,
    JointSync,
}

/// One entry of a robot's program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub kind: StepKind,
    pub instance: usize,
    pub from: usize,
    pub to: usize,
    pub distance: u64,
    pub travel_time: u32,
    pub exec_time: u32,
    pub prob: f64,
}

impl Step {
    pub fn duration(&self) -> u32 {
        self.travel_time + self.exec_time
    }
}

/// Naming and program information kept alongside a built model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelMeta {
    /// Global robot index per cluster position.
    pub robots: Vec<usize>,
    pub robot_names: Vec<String>,
    pub instance_names: Vec<String>,
    pub location_names: Vec<String>,
    pub steps: Vec<Vec<Step>>,
    /// Instances whose completion is recorded in the state.
    pub tracked: Vec<usize>,
    pub time_available: u32,
}

/// Layout of a state valuation: four slots per robot (`order`, `time`,
/// `idle`, `fail`), one slot for the sticky failure flag, then one slot per
/// tracked instance holding `completion + 1`, or 0 while pending.
pub(crate) const ROBOT_SLOTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotState {
    pub order: u32,
    pub time: u32,
    pub idle_used: u32,
    pub fail: bool,
}

#[derive(Debug, Clone)]
pub struct Choice {
    pub action: Action,
    pub travel: u64,
    pub idle: u64,
    branch_start: u32,
    branch_end: u32,
}

/// Explicit-state MDP with state 0 as the initial state.
#[derive(Debug, Clone)]
pub struct Mdp {
    choice_offsets: Vec<u32>,
    choices: Vec<Choice>,
    branches: Vec<(u32, f64)>,
    pub done: Vec<bool>,
    pub success: Vec<bool>,
    /// Per-state variable values; empty for hand-built models.
    pub valuations: Vec<Box<[u32]>>,
    pub meta: Option<ModelMeta>,
}

/// A choice before it is stored: action, distribution, travel and idle reward.
pub type RawChoice = (Action, Vec<(usize, f64)>, u64, u64);

impl Mdp {
    pub(crate) fn empty() -> Self {
        Mdp {
            choice_offsets: vec![0],
            choices: Vec::new(),
            branches: Vec::new(),
            done: Vec::new(),
            success: Vec::new(),
            valuations: Vec::new(),
            meta: None,
        }
    }

    /// Appends the next state's choices and labels. States must be added in index order.
    pub(crate) fn push_state(&mut self, choices: impl IntoIterator<Item = RawChoice>, done: bool, success: bool) {
        for (action, dist, travel, idle) in choices {
            let branch_start = self.branches.len() as u32;
            self.branches.extend(dist.into_iter().map(|(s, p)| (s as u32, p)));
            self.choices.push(Choice { action, travel, idle, branch_start, branch_end: self.branches.len() as u32 });
        }
        self.choice_offsets.push(self.choices.len() as u32);
        self.done.push(done);
        self.success.push(success);
    }

    /// Model from per-state choice lists, mainly for tests and oracles.
    pub fn from_parts(states: Vec<Vec<RawChoice>>, done: Vec<bool>, success: Vec<bool>) -> Self {
        assert_eq!(states.len(), done.len());
        assert_eq!(states.len(), success.len());
        let mut m = Mdp::empty();
        for (i, cs) in states.into_iter().enumerate() {
            m.push_state(cs, done[i], success[i]);
        }
        m
    }

    pub fn num_states(&self) -> usize {
        self.done.len()
    }

    pub fn num_choices(&self) -> usize {
        self.choices.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.branches.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn choices(&self, s: usize) -> &[Choice] {
        &self.choices[self.choice_offsets[s] as usize..self.choice_offsets[s + 1] as usize]
    }

    pub fn branches(&self, c: &Choice) -> &[(u32, f64)] {
        &self.branches[c.branch_start as usize..c.branch_end as usize]
    }

    /// Robot variables of a state (requires valuations).
    pub fn robot_state(&self, s: usize, robot: usize) -> RobotState {
        let v = &self.valuations[s][robot * ROBOT_SLOTS..(robot + 1) * ROBOT_SLOTS];
        RobotState { order: v[0], time: v[1], idle_used: v[2], fail: v[3] != 0 }
    }

    /// Human-readable action name, using model metadata when available.
    pub fn action_name(&self, a: &Action) -> String {
        let Some(meta) = &self.meta else {
            return match a {
                Action::Other(k) => format!("a{k}"),
                other => format!("{other:?}"),
            };
        };
        let robot = |r: usize| &meta.robot_names[r];
        match *a {
            Action::Task { robot: r, step } => {
                format!("{}_do_{}", robot(r), meta.instance_names[meta.steps[r][step].instance])
            }
            Action::JointTravel { robot: r, step } => {
                format!("{}_goto_{}", robot(r), meta.instance_names[meta.steps[r][step].instance])
            }
            Action::JointSync { instance } => format!("sync_{}", meta.instance_names[instance]),
            Action::Idle { robot: r } => format!("{}_idle", robot(r)),
            Action::Recover { robot: r } => format!("{}_recover", robot(r)),
            Action::Other(k) => format!("a{k}"),
        }
    }

    /// Largest deviation of any distribution's mass from 1.
    pub fn max_distribution_error(&self) -> f64 {
        self.choices
            .iter()
            .map(|c| (self.branches(c).iter().map(|b| b.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
