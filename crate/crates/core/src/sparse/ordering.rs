//! Fill-reducing symmetric orderings.
//!
//! A permutation is stored as `perm[k] = original index eliminated k-th`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{SparseError, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    Natural,
    /// Reverse Cuthill–McKee, one sweep per connected component.
    BandwidthReducing,
    /// Recursive level-structure bisection; separators are eliminated last.
    #[default]
    NestedDissection,
}

impl Ordering {
    pub fn permutation(self, a: &SparseMatrix) -> Vec<usize> {
        let adj = a.adjacency();
        match self {
            Ordering::Natural => (0..a.dim()).collect(),
            Ordering::BandwidthReducing => reverse_cuthill_mckee(&adj),
            Ordering::NestedDissection => nested_dissection(&adj),
        }
    }
}

pub fn inverse_permutation(perm: &[usize]) -> Result<Vec<usize>, SparseError> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        if p >= perm.len() || inv[p] != usize::MAX {
            return Err(SparseError::InvalidPermutation);
        }
        inv[p] = k;
    }
    Ok(inv)
}

/// Breadth-first level structure of the component containing `root`,
/// restricted to nodes with `allowed[v] == tag`.
fn level_structure(
    adj: &[Vec<usize>],
    root: usize,
    allowed: &[u32],
    tag: u32,
    level_of: &mut [usize],
) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![root]];
    level_of[root] = 0;
    let mut seen = vec![root];
    loop {
        let last = levels.last().unwrap();
        let mut next = Vec::new();
        for &u in last {
            for &v in &adj[u] {
                if allowed[v] == tag && level_of[v] == usize::MAX {
                    level_of[v] = levels.len();
                    next.push(v);
                    seen.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    for v in seen {
        level_of[v] = usize::MAX;
    }
    levels
}

/// George–Liu pseudo-peripheral node search.
fn pseudo_peripheral(
    adj: &[Vec<usize>],
    start: usize,
    allowed: &[u32],
    tag: u32,
    level_of: &mut [usize],
) -> (usize, Vec<Vec<usize>>) {
    let degree = |v: usize| adj[v].iter().filter(|&&w| allowed[w] == tag).count();
    let mut root = start;
    let mut levels = level_structure(adj, root, allowed, tag, level_of);
    loop {
        let last = levels.last().unwrap();
        let candidate = *last.iter().min_by_key(|&&v| (degree(v), v)).unwrap();
        let cand_levels = level_structure(adj, candidate, allowed, tag, level_of);
        if cand_levels.len() > levels.len() {
            root = candidate;
            levels = cand_levels;
        } else {
            return (root, levels);
        }
    }
}

pub(crate) fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let allowed = vec![0u32; n];
    let mut level_of = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |v: usize| adj[v].len();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let (root, _) = pseudo_peripheral(adj, start, &allowed, 0, &mut level_of);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        let mut nbrs = Vec::new();
        while let Some(u) = queue.pop_front() {
            order.push(u);
            nbrs.clear();
            nbrs.extend(adj[u].iter().copied().filter(|&v| !visited[v]));
            nbrs.sort_by_key(|&v| (degree(v), v));
            for &v in &nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

const DISSECTION_LEAF: usize = 48;

pub(crate) fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    // tag[v] identifies the sub-graph v currently belongs to
    let mut tag = vec![0u32; n];
    let mut next_tag = 1u32;
    let mut level_of = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let all: Vec<usize> = (0..n).collect();
    dissect(adj, all, 0, &mut tag, &mut next_tag, &mut level_of, &mut order);
    order
}

fn dissect(
    adj: &[Vec<usize>],
    nodes: Vec<usize>,
    my_tag: u32,
    tag: &mut Vec<u32>,
    next_tag: &mut u32,
    level_of: &mut [usize],
    order: &mut Vec<usize>,
) {
    if nodes.len() <= DISSECTION_LEAF {
        order.extend(nodes);
        return;
    }
    // split into connected components first
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut placed = Vec::new();
    for &s in &nodes {
        if tag[s] != my_tag {
            continue;
        }
        let ct = *next_tag;
        *next_tag += 1;
        let mut comp = vec![s];
        tag[s] = ct;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &v in &adj[u] {
                if tag[v] == my_tag {
                    tag[v] = ct;
                    comp.push(v);
                }
            }
        }
        placed.push(ct);
        components.push(comp);
    }
    for (comp, ct) in components.into_iter().zip(placed) {
        if comp.len() <= DISSECTION_LEAF {
            order.extend(comp);
            continue;
        }
        let (_, levels) = pseudo_peripheral(adj, comp[0], tag, ct, level_of);
        if levels.len() < 3 {
            order.extend(comp);
            continue;
        }
        let half = comp.len() / 2;
        let mut acc = 0;
        let mut mid = 1;
        for (l, lev) in levels.iter().enumerate() {
            acc += lev.len();
            if acc >= half {
                mid = l.clamp(1, levels.len() - 2);
                break;
            }
        }
        let a_tag = *next_tag;
        let b_tag = *next_tag + 1;
        *next_tag += 2;
        for lev in &levels[..mid] {
            for &v in lev {
                tag[v] = a_tag;
            }
        }
        for lev in &levels[mid + 1..] {
            for &v in lev {
                tag[v] = b_tag;
            }
        }
        // separator nodes without a neighbour on the far side can join part A
        let mut separator = Vec::new();
        let mut part_a: Vec<usize> = levels[..mid].concat();
        for &v in &levels[mid] {
            if adj[v].iter().any(|&w| tag[w] == b_tag) {
                separator.push(v);
            } else {
                tag[v] = a_tag;
                part_a.push(v);
            }
        }
        let part_b: Vec<usize> = levels[mid + 1..].concat();
        let sep_tag = *next_tag;
        *next_tag += 1;
        for &v in &separator {
            tag[v] = sep_tag;
        }
        dissect(adj, part_a, a_tag, tag, next_tag, level_of, order);
        dissect(adj, part_b, b_tag, tag, next_tag, level_of, order);
        order.extend(separator);
    }
}
