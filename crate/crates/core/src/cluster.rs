//! Robot interdependence and clustering.
//!
//! Two robots are related when they both work on some subtree of the
//! pruned mission tree. Connected components of that relation can be
//! scheduled independently.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::alloc::Allocation;
use crate::tasks::Subtree;

/// Reflexive, symmetric relation over the used robots of one allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterdependenceMatrix {
    /// Robot indices labelling rows and columns, ascending.
    pub robots: Vec<usize>,
    pub m: Vec<Vec<bool>>,
}

impl InterdependenceMatrix {
    pub fn identity(robots: Vec<usize>) -> Self {
        let n = robots.len();
        let m = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        InterdependenceMatrix { robots, m }
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    fn pos(&self, robot: usize) -> usize {
        self.robots.binary_search(&robot).expect("robot is part of the matrix")
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.m[self.pos(a)][self.pos(b)]
    }

    /// One line per row, `1`/`0` per column, prefixed by the row's robot name.
    pub fn render(&self, names: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        for (i, &r) in self.robots.iter().enumerate() {
            let row: String = self.m[i].iter().map(|&b| if b { '1' } else { '0' }).collect();
            let _ = writeln!(out, "{} {}", names(r), row);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RobotCluster {
    pub robots: Vec<usize>,
    pub instances: Vec<usize>,
}

/// Robots assigned to any leaf of the subtree.
pub fn robots_of_subtree(a: &Allocation, s: &Subtree) -> BTreeSet<usize> {
    s.leaves.iter().flat_map(|&i| a.assignments[i].iter().copied()).collect()
}

pub fn relation_matrix(a: &Allocation, subtrees: &[Subtree]) -> InterdependenceMatrix {
    let mut mat = InterdependenceMatrix::identity(a.used_robots.iter().copied().collect());
    for s in subtrees {
        let rs: Vec<usize> = robots_of_subtree(a, s).into_iter().map(|r| mat.pos(r)).collect();
        for &x in &rs {
            for &y in &rs {
                mat.m[x][y] = true;
            }
        }
    }
    mat
}

/// Reflexive-transitive closure by Warshall's algorithm.
pub fn transitive_closure(m: &InterdependenceMatrix) -> InterdependenceMatrix {
    let n = m.len();
    let mut c = m.m.clone();
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if c[i][k] {
                for j in 0..n {
                    if c[k][j] {
                        c[i][j] = true;
                    }
                }
            }
        }
    }
    InterdependenceMatrix { robots: m.robots.clone(), m: c }
}

fn clusters_from_groups(mut groups: Vec<Vec<usize>>, a: &Allocation) -> Vec<RobotCluster> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
        .into_iter()
        .map(|robots| {
            let instances = (0..a.assignments.len())
                .filter(|&i| a.assignments[i].iter().any(|r| robots.binary_search(r).is_ok()))
                .collect();
            RobotCluster { robots, instances }
        })
        .collect()
}

/// Components of a closed matrix, ordered by smallest robot.
pub fn clusters(m_prime: &InterdependenceMatrix, a: &Allocation) -> Vec<RobotCluster> {
    let n = m_prime.len();
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let group: Vec<usize> = (0..n).filter(|&j| m_prime.m[i][j]).collect();
        for &j in &group {
            seen[j] = true;
        }
        groups.push(group.into_iter().map(|j| m_prime.robots[j]).collect());
    }
    clusters_from_groups(groups, a)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of a symmetric relation via union-find.
pub fn components_union_find(m: &InterdependenceMatrix) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if m.m[i][j] {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = uf.find(i);
        groups[root].push(m.robots[i]);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// Clusters of one allocation, computed directly from the subtrees.
pub fn cluster_allocation(a: &Allocation, subtrees: &[Subtree]) -> Vec<RobotCluster> {
    let robots: Vec<usize> = a.used_robots.iter().copied().collect();
    let mut uf = UnionFind::new(robots.len());
    let pos = |r: usize| robots.binary_search(&r).expect("used robot");
    for s in subtrees {
        let rs: Vec<usize> = robots_of_subtree(a, s).into_iter().collect();
        for w in rs.windows(2) {
            uf.union(pos(w[0]), pos(w[1]));
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); robots.len()];
    for (i, &r) in robots.iter().enumerate() {
        let root = uf.find(i);
        groups[root].push(r);
    }
    clusters_from_groups(groups.into_iter().filter(|g| !g.is_empty()).collect(), a)
}
