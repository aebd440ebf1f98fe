//! Syntax tree for `.kanoa` problem files.
//!
//! Nodes carry a [`Span`] pointing at the keyword that introduced them. Spans
//! never take part in equality, so two trees parsed from differently laid out
//! text compare equal when they describe the same problem.

use num_rational::Ratio;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Length units per time unit.
pub type Velocity = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemSpec {
    pub world: World,
    pub tasks: TaskModel,
    pub robots: Vec<RobotDef>,
    pub mission: Mission,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct World {
    pub locations: Vec<Location>,
    pub distances: Vec<DistanceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: String,
    pub x: i64,
    pub y: i64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEntry {
    pub from: String,
    pub to: String,
    pub distance: u64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskModel {
    pub atomic: Vec<AtomicTaskDef>,
    pub compound: Vec<CompoundTaskDef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicTaskDef {
    pub id: String,
    pub robots_needed: u32,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompoundTaskDef {
    pub id: String,
    pub subtasks: Vec<String>,
    pub ordered: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capability {
    pub task: String,
    pub required_time: u32,
    pub success_prob: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotDef {
    pub id: String,
    pub initial_loc: String,
    pub velocity: Velocity,
    pub capabilities: Vec<Capability>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mission {
    pub tasks: Vec<MissionTaskRef>,
    pub constraints: Vec<ConstraintSpec>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionTaskRef {
    pub task: String,
    pub location: String,
    pub span: Span,
}

/// Who a boundary or idle constraint applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    All,
    Robot(String),
}

/// Axis-aligned rectangle, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub min_x: i64,
    pub min_y: i64,
    pub max_x: i64,
    pub max_y: i64,
}

impl Rect {
    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.min_x <= x && x <= self.max_x && self.min_y <= y && y <= self.max_y
    }

    pub fn is_well_formed(&self) -> bool {
        self.min_x <= self.max_x && self.min_y <= self.max_y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    Boundary { subject: Subject, rect: Rect, span: Span },
    TimeAvailable { budget: u32, span: Span },
    MaxIdle { subject: Subject, budget: u32, span: Span },
}

impl ConstraintSpec {
    pub fn span(&self) -> Span {
        match self {
            ConstraintSpec::Boundary { span, .. }
            | ConstraintSpec::TimeAvailable { span, .. }
            | ConstraintSpec::MaxIdle { span, .. } => *span,
        }
    }
}
