//! Morse trees, planted trivalent planar trees, and the encoding of one into
//! a pair (planar shape, permutation).
//!
//! A Morse tree on labels `0 ..= 2n+1` has only degree-1 and degree-3
//! vertices, and each degree-3 vertex (a node) has both a smaller and a
//! larger labelled neighbour. Brute-force enumeration of these trees is the
//! counting oracle for the recurrence.
//!
//! The encoding plants a Morse tree at label 0, orders the two child
//! subtrees of every node by their smallest label, and reads the labels off
//! in first-child-first preorder. Decoding reverses this, so the encoding is
//! injective and `g(n) <= C_n (2n+1)!`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest `n` that [`enumerate_morse_trees`] will attempt.
pub const MORSE_TREE_BUDGET: usize = 4;
/// Largest `n` that [`enumerate_ptpt`] will attempt.
pub const PTPT_BUDGET: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorseTree {
    n: usize,
    // sorted, each edge (a, b) with a < b
    edges: Vec<(u32, u32)>,
}

impl MorseTree {
    /// Validates and normalizes a labelled tree on `0 ..= 2n+1`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut edges: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        if !validate_morse_tree(n, &edges) {
            return Err(Error::Domain(format!(
                "edges {edges:?} do not form a Morse tree with n = {n}"
            )));
        }
        Ok(Self { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n + 2
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        adjacency(self.vertex_count(), &self.edges)
    }

    /// Labels of the degree-3 vertices, ascending.
    pub fn nodes(&self) -> Vec<u32> {
        self.adjacency()
            .iter()
            .enumerate()
            .filter(|(_, nb)| nb.len() == 3)
            .map(|(v, _)| v as u32)
            .collect()
    }

    /// Parses `n=<int>` followed by one `a-b` line per edge.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty tree description".into()))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected `n=<int>`, got {header:?}")))?;
        let edges = lines
            .map(|line| {
                line.split_once('-')
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                    .ok_or_else(|| Error::Parse(format!("expected `a-b`, got {line:?}")))
            })
            .collect::<Result<Vec<(u32, u32)>>>()?;
        Self::new(n, edges)
    }
}

impl fmt::Display for MorseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        for (a, b) in &self.edges {
            writeln!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}

fn adjacency(vertices: usize, edges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); vertices];
    for &(a, b) in edges {
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    adj
}

/// True iff `edges` is a Morse tree on the labels `0 ..= 2n+1`.
pub fn validate_morse_tree(n: usize, edges: &[(u32, u32)]) -> bool {
    let m = 2 * n + 2;
    if edges.len() != m - 1 {
        return false;
    }
    if edges
        .iter()
        .any(|&(a, b)| a == b || a as usize >= m || b as usize >= m)
    {
        return false;
    }
    let adj = adjacency(m, edges);
    if adj.iter().any(|nb| nb.windows(2).any(|w| w[0] == w[1])) {
        return false;
    }
    // m - 1 edges plus connectivity makes a tree
    let mut seen = vec![false; m];
    let mut stack = vec![0u32];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v as usize] {
            if !seen[u as usize] {
                seen[u as usize] = true;
                stack.push(u);
            }
        }
    }
    if seen.contains(&false) {
        return false;
    }
    adj.iter().enumerate().all(|(v, nb)| match nb.len() {
        1 => true,
        3 => nb.iter().any(|&u| (u as usize) < v) && nb.iter().any(|&u| (u as usize) > v),
        _ => false,
    })
}

/// Every Morse tree with `2n + 2` vertices, by brute force.
///
/// Labelled trees with a prescribed degree sequence correspond to Prüfer
/// words in which each vertex of degree `d` occurs `d - 1` times, so only
/// words using `n` chosen labels exactly twice each are decoded.
pub fn enumerate_morse_trees(n: usize) -> Result<BTreeSet<MorseTree>> {
    if n > MORSE_TREE_BUDGET {
        return Err(Error::Budget {
            n,
            budget: MORSE_TREE_BUDGET,
        });
    }
    let m = 2 * n + 2;
    let mut found = BTreeSet::new();
    for nodes in combinations(m, n) {
        let mut counts = vec![0u8; m];
        for &v in &nodes {
            counts[v] = 2;
        }
        let mut word = Vec::with_capacity(2 * n);
        multiset_words(&nodes, &mut counts, &mut word, 2 * n, &mut |w| {
            let edges = prufer_decode(m, w);
            if validate_morse_tree(n, &edges) {
                let mut edges = edges;
                edges.sort_unstable();
                found.insert(MorseTree { n, edges });
            }
        });
    }
    Ok(found)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..m {
            if m - v < k - cur.len() {
                break;
            }
            cur.push(v);
            go(v + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

fn multiset_words(
    symbols: &[usize],
    counts: &mut [u8],
    word: &mut Vec<usize>,
    len: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if word.len() == len {
        visit(word);
        return;
    }
    for &s in symbols {
        if counts[s] > 0 {
            counts[s] -= 1;
            word.push(s);
            multiset_words(symbols, counts, word, len, visit);
            word.pop();
            counts[s] += 1;
        }
    }
}

/// Edges of the labelled tree on `0..m` with Prüfer word `word`.
fn prufer_decode(m: usize, word: &[usize]) -> Vec<(u32, u32)> {
    debug_assert_eq!(word.len() + 2, m);
    let mut degree = vec![1usize; m];
    for &v in word {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    for &v in word {
        let leaf = (0..m)
            .find(|&u| degree[u] == 1)
            .expect("a leaf always exists");
        edges.push((leaf.min(v) as u32, leaf.max(v) as u32));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..m).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0] as u32, rest[1] as u32));
    edges
}

/// A planted trivalent planar tree: the root has one child and every other
/// internal vertex has exactly two ordered children.
///
/// Vertices are numbered in first-child-first preorder with the root at 0,
/// so structurally equal trees compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ptpt {
    children: Vec<Vec<usize>>,
}

impl Ptpt {
    /// Builds from child lists (vertex 0 is the root), renumbering into
    /// preorder.
    pub fn from_children(children: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |why: String| {
            Err(Error::Domain(format!(
                "not a planted trivalent tree: {why}"
            )))
        };
        let count = children.len();
        if count < 2 {
            return bad("fewer than two vertices".into());
        }
        if children[0].len() != 1 {
            return bad("root must have exactly one child".into());
        }
        let mut parents = vec![0usize; count];
        for (v, ch) in children.iter().enumerate() {
            if v != 0 && !(ch.is_empty() || ch.len() == 2) {
                return bad(format!("vertex {v} has {} children", ch.len()));
            }
            for &c in ch {
                if c >= count || c == 0 {
                    return bad(format!("invalid child index {c}"));
                }
                parents[c] += 1;
            }
        }
        if parents.iter().skip(1).any(|&p| p != 1) {
            return bad("every non-root vertex needs exactly one parent".into());
        }
        let mut order = Vec::with_capacity(count);
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(children[v].iter().rev());
        }
        if order.len() != count {
            return bad("disconnected".into());
        }
        let mut renumber = vec![0usize; count];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        let children = order
            .iter()
            .map(|&old| children[old].iter().map(|&c| renumber[c]).collect())
            .collect();
        Ok(Self { children })
    }

    pub fn vertex_count(&self) -> usize {
        self.children.len()
    }

    /// Number of nodes; the tree has `2n + 2` vertices.
    pub fn n(&self) -> usize {
        (self.children.len() - 2) / 2
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Each vertex as `(` followed by its children and `)`, root included.
    pub fn to_balanced(&self) -> String {
        let mut out = String::with_capacity(2 * self.vertex_count());
        let mut stack = vec![(0usize, false)];
        while let Some((v, closing)) = stack.pop() {
            if closing {
                out.push(')');
                continue;
            }
            out.push('(');
            stack.push((v, true));
            for &c in self.children[v].iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    pub fn from_balanced(s: &str) -> Result<Self> {
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        let mut closed_root = false;
        for ch in s.trim().chars() {
            if closed_root {
                return Err(Error::Parse(format!("trailing input in {s:?}")));
            }
            match ch {
                '(' => {
                    let v = children.len();
                    children.push(Vec::new());
                    if let Some(&p) = open.last() {
                        children[p].push(v);
                    } else if v != 0 {
                        return Err(Error::Parse(format!("more than one root in {s:?}")));
                    }
                    open.push(v);
                }
                ')' => {
                    open.pop()
                        .ok_or_else(|| Error::Parse(format!("unbalanced {s:?}")))?;
                    closed_root = open.is_empty();
                }
                _ => return Err(Error::Parse(format!("unexpected {ch:?} in {s:?}"))),
            }
        }
        if !closed_root {
            return Err(Error::Parse(format!("unbalanced {s:?}")));
        }
        Self::from_children(children)
    }
}

impl fmt::Display for Ptpt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_balanced())
    }
}

/// All planted trivalent planar trees with `2n + 2` vertices.
pub fn enumerate_ptpt(n: usize) -> Result<Vec<Ptpt>> {
    if n > PTPT_BUDGET {
        return Err(Error::Budget {
            n,
            budget: PTPT_BUDGET,
        });
    }
    // shapes[k]: balanced strings of subtrees with k nodes
    let mut shapes: Vec<Vec<String>> = vec![vec!["()".to_string()]];
    for k in 1..=n {
        let mut level = Vec::new();
        for left in 0..k {
            for l in &shapes[left] {
                for r in &shapes[k - 1 - left] {
                    level.push(format!("({l}{r})"));
                }
            }
        }
        shapes.push(level);
    }
    shapes[n]
        .iter()
        .map(|s| Ptpt::from_balanced(&format!("({s})")))
        .collect()
}

/// Labels the non-root vertices `1 ..= 2n+1` in the order a walk around the
/// planar tree first meets them: preorder from the root's child, first child
/// before second. Returns the label of each vertex, `None` at the root.
pub fn walk_labels(p: &Ptpt) -> Vec<Option<u32>> {
    let mut labels = vec![None; p.vertex_count()];
    let mut next = 1u32;
    let mut stack: Vec<usize> = p.children(0).iter().rev().copied().collect();
    while let Some(v) = stack.pop() {
        labels[v] = Some(next);
        next += 1;
        stack.extend(p.children(v).iter().rev());
    }
    labels
}

/// A planar shape together with `φ`, stored as the word `φ(1) ... φ(2n+1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncodedPair {
    pub tree: Ptpt,
    pub perm: Vec<u32>,
}

impl EncodedPair {
    /// Two lines: the balanced string, then `φ = w1 w2 ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let shape = lines
            .next()
            .ok_or_else(|| Error::Parse("missing tree line".into()))?;
        let perm_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing permutation line".into()))?;
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected line {extra:?}")));
        }
        let words = perm_line
            .strip_prefix("φ")
            .or_else(|| perm_line.strip_prefix("phi"))
            .and_then(|rest| rest.trim_start().strip_prefix('='))
            .ok_or_else(|| Error::Parse(format!("expected `φ = ...`, got {perm_line:?}")))?;
        let perm = words
            .split_whitespace()
            .map(|w| {
                w.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad permutation entry {w:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tree: Ptpt::from_balanced(shape)?,
            perm,
        })
    }
}

impl fmt::Display for EncodedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.tree)?;
        write!(f, "φ =")?;
        for w in &self.perm {
            write!(f, " {w}")?;
        }
        writeln!(f)
    }
}

/// Plants `t` at label 0, orders each node's child subtrees by their smallest
/// label, and records the Morse label found at each walk position.
pub fn encode(t: &MorseTree) -> EncodedPair {
    let adj = t.adjacency();
    let m = t.vertex_count();

    // smallest label in the subtree below each vertex (planted at 0)
    let mut parent = vec![u32::MAX; m];
    let mut order = Vec::with_capacity(m);
    let mut stack = vec![0u32];
    parent[0] = 0;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &u in &adj[v as usize] {
            if u != 0 && parent[u as usize] == u32::MAX {
                parent[u as usize] = v;
                stack.push(u);
            }
        }
    }
    let mut subtree_min: Vec<u32> = (0..m as u32).collect();
    for &v in order.iter().rev().filter(|&&v| v != 0) {
        let p = parent[v as usize] as usize;
        subtree_min[p] = subtree_min[p].min(subtree_min[v as usize]);
    }

    // arena in preorder with ordered children, remembering Morse labels
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut morse: Vec<u32> = Vec::with_capacity(m);
    let mut stack: Vec<(u32, Option<usize>)> = vec![(0, None)];
    while let Some((v, arena_parent)) = stack.pop() {
        let idx = children.len();
        children.push(Vec::new());
        morse.push(v);
        if let Some(p) = arena_parent {
            children[p].push(idx);
        }
        let mut kids: Vec<u32> = adj[v as usize]
            .iter()
            .copied()
            .filter(|&u| u != 0 && parent[u as usize] == v)
            .collect();
        kids.sort_by_key(|&u| subtree_min[u as usize]);
        for &u in kids.iter().rev() {
            stack.push((u, Some(idx)));
        }
    }
    let tree = Ptpt::from_children(children).expect("a planted Morse tree is trivalent");
    let walk = walk_labels(&tree);
    let mut perm = vec![0u32; m - 1];
    for (v, label) in walk.iter().enumerate() {
        if let Some(i) = label {
            perm[*i as usize - 1] = morse[v];
        }
    }
    EncodedPair { tree, perm }
}

/// Rebuilds the Morse tree: root labelled 0, the vertex at walk position `i`
/// labelled `φ(i)`. Fails if the result is not a Morse tree.
pub fn decode(pair: &EncodedPair) -> Result<MorseTree> {
    let p = &pair.tree;
    let n = p.n();
    let m = p.vertex_count();
    let mut seen = vec![false; m];
    if pair.perm.len() != m - 1
        || pair
            .perm
            .iter()
            .any(|&w| w == 0 || w as usize >= m || std::mem::replace(&mut seen[w as usize], true))
    {
        return Err(Error::NotInImage(format!(
            "φ = {:?} is not a permutation of 1..={}",
            pair.perm,
            m - 1
        )));
    }
    let walk = walk_labels(p);
    let label = |v: usize| walk[v].map_or(0, |i| pair.perm[i as usize - 1]);
    let edges: Vec<(u32, u32)> = (0..m)
        .flat_map(|v| p.children(v).iter().map(move |&c| (v, c)))
        .map(|(v, c)| (label(v), label(c)))
        .collect();
    MorseTree::new(n, edges).map_err(|_| {
        Error::NotInImage(format!(
            "relabelled tree {} violates the node condition",
            pair
        ))
    })
}
