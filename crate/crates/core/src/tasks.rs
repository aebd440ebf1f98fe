//! Mission expansion into atomic task instances.
//!
//! Every mission task is instantiated independently: compound tasks are
//! unfolded recursively and each atomic occurrence becomes a
//! [`TaskInstance`] named `<type>_<ordinal>`, ordinals counted per type in
//! mission declaration order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::dsl::{TaskRef, ValidatedProblem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskInstance {
    pub id: String,
    pub type_id: String,
    #[serde(skip)]
    pub atomic: usize,
    pub location_id: String,
    #[serde(skip)]
    pub location: usize,
    pub robots_needed: u32,
}

impl TaskInstance {
    pub fn is_joint(&self) -> bool {
        self.robots_needed >= 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Mission,
    Compound { task: String, ordered: bool },
    Leaf { instance: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

/// The mission tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskInstanceTree {
    pub nodes: Vec<TreeNode>,
    pub instances: Vec<TaskInstance>,
}

impl TaskInstanceTree {
    pub const ROOT: usize = 0;

    /// Leaf instances below `node`, left to right.
    pub fn leaves_of(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            match self.nodes[n].kind {
                NodeKind::Leaf { instance } => out.push(instance),
                _ => stack.extend(self.nodes[n].children.iter().rev()),
            }
        }
        out
    }

    pub fn instance_index(&self, id: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PrecedencePair {
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subtree {
    pub id: usize,
    pub leaves: BTreeSet<usize>,
}

struct Expander<'a> {
    problem: &'a ValidatedProblem,
    nodes: Vec<TreeNode>,
    instances: Vec<TaskInstance>,
    ordinals: BTreeMap<usize, usize>,
    precedence: BTreeSet<PrecedencePair>,
}

/// Instances a subtree starts with and ends with, for chaining ordered siblings.
struct Ends {
    first: Vec<usize>,
    last: Vec<usize>,
}

impl Expander<'_> {
    fn push(&mut self, kind: NodeKind) -> usize {
        self.nodes.push(TreeNode { kind, children: Vec::new() });
        self.nodes.len() - 1
    }

    fn expand(&mut self, task: &str, location: usize, parent: usize) -> Ends {
        match self.problem.task(task).expect("validated reference") {
            TaskRef::Atomic(a) => {
                let def = self.problem.atomic(a);
                let ord = self.ordinals.entry(a).or_insert(0);
                let inst = TaskInstance {
                    id: format!("{}_{}", def.id, ord),
                    type_id: def.id.clone(),
                    atomic: a,
                    location_id: self.problem.location(location).id.clone(),
                    location,
                    robots_needed: def.robots_needed,
                };
                *ord += 1;
                self.instances.push(inst);
                let i = self.instances.len() - 1;
                let node = self.push(NodeKind::Leaf { instance: i });
                self.nodes[parent].children.push(node);
                Ends { first: vec![i], last: vec![i] }
            }
            TaskRef::Compound(c) => {
                let def = self.problem.compound(c).clone();
                let node = self.push(NodeKind::Compound { task: def.id.clone(), ordered: def.ordered });
                self.nodes[parent].children.push(node);
                let children: Vec<Ends> = def.subtasks.iter().map(|s| self.expand(s, location, node)).collect();
                if def.ordered {
                    for w in children.windows(2) {
                        for &b in &w[0].last {
                            for &a in &w[1].first {
                                self.precedence.insert(PrecedencePair { before: b, after: a });
                            }
                        }
                    }
                    Ends {
                        first: children.first().map(|e| e.first.clone()).unwrap_or_default(),
                        last: children.last().map(|e| e.last.clone()).unwrap_or_default(),
                    }
                } else {
                    Ends {
                        first: children.iter().flat_map(|e| e.first.iter().copied()).collect(),
                        last: children.iter().flat_map(|e| e.last.iter().copied()).collect(),
                    }
                }
            }
        }
    }
}

/// Unfolds the mission into the instance tree and its precedence pairs.
///
/// Inside an ordered compound, every instance that can finish child `i`
/// precedes every instance that can start child `i + 1`: an atomic child is
/// both, an ordered child contributes its first/last child's ends, and an
/// unordered child contributes the ends of all its children.
pub fn expand_mission(problem: &ValidatedProblem) -> (TaskInstanceTree, Vec<PrecedencePair>) {
    let mut ex = Expander {
        problem,
        nodes: Vec::new(),
        instances: Vec::new(),
        ordinals: BTreeMap::new(),
        precedence: BTreeSet::new(),
    };
    ex.push(NodeKind::Mission);
    for m in &problem.spec().mission.tasks {
        let loc = problem.location_index(&m.location).expect("validated reference");
        ex.expand(&m.task, loc, TaskInstanceTree::ROOT);
    }
    let tree = TaskInstanceTree { nodes: ex.nodes, instances: ex.instances };
    (tree, ex.precedence.into_iter().collect())
}

/// Breadth-first split of the tree: joint tasks, ordered compounds and leaves
/// are cut off whole; the root and unordered compounds are descended.
pub fn prune_subtrees(tree: &TaskInstanceTree) -> Vec<Subtree> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([TaskInstanceTree::ROOT]);
    while let Some(n) = queue.pop_front() {
        let node = &tree.nodes[n];
        let cut = match node.kind {
            NodeKind::Leaf { .. } => true,
            NodeKind::Compound { ordered, .. } => ordered,
            NodeKind::Mission => false,
        };
        if cut {
            out.push(Subtree { id: out.len(), leaves: tree.leaves_of(n).into_iter().collect() });
        } else {
            queue.extend(node.children.iter().copied());
        }
    }
    out
}

/// Instance tree, precedence and subtrees of one mission, with lookup helpers.
#[derive(Debug, Clone, Serialize)]
pub struct TaskGraph {
    pub tree: TaskInstanceTree,
    pub precedence: Vec<PrecedencePair>,
    pub subtrees: Vec<Subtree>,
    #[serde(skip)]
    preds: Vec<Vec<usize>>,
}

impl TaskGraph {
    pub fn new(problem: &ValidatedProblem) -> Self {
        let (tree, precedence) = expand_mission(problem);
        let subtrees = prune_subtrees(&tree);
        let mut preds = vec![Vec::new(); tree.instances.len()];
        for p in &precedence {
            preds[p.after].push(p.before);
        }
        TaskGraph { tree, precedence, subtrees, preds }
    }

    pub fn instances(&self) -> &[TaskInstance] {
        &self.tree.instances
    }

    pub fn instance(&self, i: usize) -> &TaskInstance {
        &self.tree.instances[i]
    }

    /// Direct predecessors of an instance.
    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    /// `reach[a][b]` when `a` must (transitively) finish before `b` starts.
    pub fn precedence_closure(&self) -> Vec<Vec<bool>> {
        let n = self.tree.instances.len();
        let mut reach = vec![vec![false; n]; n];
        for p in &self.precedence {
            reach[p.before][p.after] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }

    /// Instances in an order compatible with precedence, or `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.tree.instances.len();
        let mut indeg = vec![0usize; n];
        for p in &self.precedence {
            indeg[p.after] += 1;
        }
        let mut ready: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(i) = ready.pop_front() {
            out.push(i);
            for p in self.precedence.iter().filter(|p| p.before == i) {
                indeg[p.after] -= 1;
                if indeg[p.after] == 0 {
                    ready.push_back(p.after);
                }
            }
        }
        (out.len() == n).then_some(out)
    }
}
