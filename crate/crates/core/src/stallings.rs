//! Stallings core graphs of finitely generated subgroups of a free group.
//!
//! A [`CoreGraph`] is a folded, trimmed automaton whose closed reduced paths at
//! the basepoint spell exactly the elements of the subgroup `H`. Everything the
//! rest of the crate needs about `H` is read off it: membership, the
//! shortlex-least representative of a left coset `gH`, the quasiconvexity
//! constant, and the limit set `Λ(H)` together with its translates `gΛ(H)`,
//! which are the infinite non-backtracking paths of the graph.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

const NONE: u32 = u32::MAX;

/// Folded Stallings graph of a subgroup. Vertex 0 is the basepoint; vertices
/// are numbered in breadth-first order from it, following letters in
/// alphabet order, so equal subgroups yield identical graphs.
#[derive(Clone, PartialEq, Eq)]
pub struct CoreGraph {
    rank: usize,
    /// `trans[v * 2r + l]`: target of the `l`-labelled edge out of `v`.
    trans: Vec<u32>,
    generators: Vec<Word>,
    /// Distance of each vertex from the basepoint.
    depth: Vec<usize>,
    /// `alive[v * (2r + 1) + l]`: an infinite non-backtracking path leaves `v`
    /// when `v` was entered by letter `l` (`l = 2r` means no constraint).
    alive: Vec<bool>,
    finite_index: bool,
}

/// Outcome of reading a word from the basepoint: the last vertex reached and
/// the number of letters consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadOutcome {
    pub vertex: usize,
    pub consumed: usize,
}

struct Folder {
    width: usize,
    parent: Vec<usize>,
    trans: Vec<Vec<Option<usize>>>,
}

impl Folder {
    fn new(width: usize) -> Folder {
        Folder {
            width,
            parent: Vec::new(),
            trans: Vec::new(),
        }
    }

    fn add_vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.trans.push(vec![None; self.width]);
        self.parent.len() - 1
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn add_half(&mut self, u: usize, l: usize, v: usize, pending: &mut Vec<(usize, usize)>) {
        match self.trans[u][l] {
            Some(w) => {
                let w = self.find(w);
                if w != v {
                    pending.push((w, v));
                }
            }
            None => self.trans[u][l] = Some(v),
        }
    }

    fn add_edge(&mut self, u: usize, l: Letter, v: usize) {
        let mut pending = Vec::new();
        self.link(u, l, v, &mut pending);
        while let Some((a, b)) = pending.pop() {
            self.merge(a, b, &mut pending);
        }
    }

    fn link(&mut self, u: usize, l: Letter, v: usize, pending: &mut Vec<(usize, usize)>) {
        let (u, v) = (self.find(u), self.find(v));
        self.add_half(u, l.code(), v, pending);
        self.add_half(v, l.inverse().code(), u, pending);
    }

    fn merge(&mut self, a: usize, b: usize, pending: &mut Vec<(usize, usize)>) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        self.parent[gone] = keep;
        let moved = std::mem::take(&mut self.trans[gone]);
        for (l, t) in moved.into_iter().enumerate() {
            if let Some(t) = t {
                self.link(keep, Letter::from_code(l), t, pending);
            }
        }
    }
}

impl CoreGraph {
    /// Folds the given generators into a core graph and rejects trivial and
    /// finite-index subgroups.
    pub fn fold(rank: usize, generators: &[Word]) -> Result<CoreGraph> {
        let core = CoreGraph::fold_any(rank, generators)?;
        if core.finite_index {
            return Err(Error::NotProper);
        }
        Ok(core)
    }

    /// Like [`CoreGraph::fold`] but accepts finite-index subgroups.
    pub fn fold_any(rank: usize, generators: &[Word]) -> Result<CoreGraph> {
        let width = 2 * rank;
        for g in generators {
            if g.min_rank() > rank {
                let bad = g.letters().iter().find(|l| l.generator() >= rank).unwrap();
                return Err(Error::UnknownLetter {
                    letter: bad.to_char(),
                    rank,
                });
            }
        }
        let generators: Vec<Word> = generators.iter().filter(|g| !g.is_identity()).cloned().collect();
        if generators.is_empty() {
            return Err(Error::TrivialSubgroup);
        }

        let mut folder = Folder::new(width);
        let base = folder.add_vertex();
        for g in &generators {
            let mut at = base;
            let n = g.len();
            for (i, &l) in g.letters().iter().enumerate() {
                let next = if i + 1 == n { base } else { folder.add_vertex() };
                folder.add_edge(at, l, next);
                at = next;
            }
        }

        // Resolve representatives into a plain transition table.
        let count = folder.parent.len();
        let mut table: Vec<Vec<Option<usize>>> = vec![vec![None; width]; count];
        for v in 0..count {
            if folder.find(v) != v {
                continue;
            }
            for l in 0..width {
                if let Some(t) = folder.trans[v][l] {
                    table[v][l] = Some(folder.find(t));
                }
            }
        }
        let base = folder.find(base);

        // Trim hanging trees away from the basepoint.
        let degree = |table: &Vec<Vec<Option<usize>>>, v: usize| table[v].iter().flatten().count();
        let mut stack: Vec<usize> = (0..count)
            .filter(|&v| v != base && folder.parent[v] == v && degree(&table, v) == 1)
            .collect();
        while let Some(v) = stack.pop() {
            if degree(&table, v) != 1 {
                continue;
            }
            let (l, t) = table[v]
                .iter()
                .enumerate()
                .find_map(|(l, t)| t.map(|t| (l, t)))
                .unwrap();
            table[v][l] = None;
            table[t][l ^ 1] = None;
            if t != base && degree(&table, t) == 1 {
                stack.push(t);
            }
        }
        if degree(&table, base) == 0 {
            return Err(Error::TrivialSubgroup);
        }

        // Canonical breadth-first renumbering from the basepoint.
        let mut order = vec![NONE; count];
        let mut queue = VecDeque::from([base]);
        let mut visited = vec![base];
        order[base] = 0;
        while let Some(u) = queue.pop_front() {
            for t in table[u].iter().flatten() {
                if order[*t] == NONE {
                    order[*t] = visited.len() as u32;
                    visited.push(*t);
                    queue.push_back(*t);
                }
            }
        }
        let n = visited.len();
        let mut trans = vec![NONE; n * width];
        for (new, &old) in visited.iter().enumerate() {
            for l in 0..width {
                if let Some(t) = table[old][l] {
                    trans[new * width + l] = order[t];
                }
            }
        }

        let mut core = CoreGraph {
            rank,
            trans,
            generators,
            depth: Vec::new(),
            alive: Vec::new(),
            finite_index: false,
        };
        core.finite_index = core.trans.iter().all(|&t| t != NONE);
        core.depth = core.bfs_depths();
        core.alive = core.compute_alive();
        Ok(core)
    }

    fn bfs_depths(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for l in Letter::alphabet(self.rank) {
                if let Some(t) = self.transition(u, l) {
                    if depth[t] == usize::MAX {
                        depth[t] = depth[u] + 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        depth
    }

    /// Greatest fixed point: a state survives if some non-backtracking edge
    /// leads to a surviving state.
    fn compute_alive(&self) -> Vec<bool> {
        let width = 2 * self.rank;
        let n = self.vertex_count();
        let stride = width + 1;
        let mut alive = vec![true; n * stride];
        loop {
            let mut changed = false;
            for v in 0..n {
                for incoming in 0..=width {
                    let idx = v * stride + incoming;
                    if !alive[idx] {
                        continue;
                    }
                    let ok = Letter::alphabet(self.rank).any(|l| {
                        if incoming < width && l == Letter::from_code(incoming).inverse() {
                            return false;
                        }
                        match self.transition(v, l) {
                            Some(t) => alive[t * stride + l.code()],
                            None => false,
                        }
                    });
                    if !ok {
                        alive[idx] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                return alive;
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn vertex_count(&self) -> usize {
        self.trans.len() / (2 * self.rank)
    }

    /// Undirected edges as `(source, positive letter, target)`.
    pub fn edges(&self) -> Vec<(usize, Letter, usize)> {
        let mut out = Vec::new();
        for v in 0..self.vertex_count() {
            for g in 0..self.rank {
                let l = Letter::new(g, false);
                if let Some(t) = self.transition(v, l) {
                    out.push((v, l, t));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn degree(&self, v: usize) -> usize {
        Letter::alphabet(self.rank)
            .filter(|&l| self.transition(v, l).is_some())
            .count()
    }

    /// Rank of the subgroup: `E − V + 1`.
    pub fn betti_number(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    #[inline]
    pub fn transition(&self, v: usize, l: Letter) -> Option<usize> {
        let t = self.trans[v * 2 * self.rank + l.code()];
        (t != NONE).then_some(t as usize)
    }

    /// Graph distance from the basepoint to each vertex.
    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    pub fn is_finite_index(&self) -> bool {
        self.finite_index
    }

    pub fn is_proper(&self) -> bool {
        !self.finite_index
    }

    /// Quasiconvexity constant `λ`: the eccentricity of the basepoint. A prefix
    /// of a word in `H` ends at some vertex `v`, and returning along a shortest
    /// path to the basepoint reaches an element of `H` within `depth(v) ≤ λ`.
    pub fn quasiconvexity_constant(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Reads `w` from `start` as far as the graph allows.
    pub fn read_from(&self, start: usize, w: &Word) -> ReadOutcome {
        let mut at = start;
        for (i, &l) in w.letters().iter().enumerate() {
            match self.transition(at, l) {
                Some(t) => at = t,
                None => {
                    return ReadOutcome {
                        vertex: at,
                        consumed: i,
                    }
                }
            }
        }
        ReadOutcome {
            vertex: at,
            consumed: w.len(),
        }
    }

    pub fn read(&self, w: &Word) -> ReadOutcome {
        self.read_from(0, w)
    }

    pub fn membership(&self, w: &Word) -> bool {
        let r = self.read(w);
        r.consumed == w.len() && r.vertex == 0
    }

    /// Shortlex-least label of a shortest path from `v` to the basepoint.
    pub fn path_to_base(&self, mut v: usize) -> Word {
        let mut letters = Vec::with_capacity(self.depth[v]);
        while v != 0 {
            let (l, t) = Letter::alphabet(self.rank)
                .find_map(|l| {
                    self.transition(v, l)
                        .filter(|&t| self.depth[t] + 1 == self.depth[v])
                        .map(|t| (l, t))
                })
                .expect("basepoint reachable");
            letters.push(l);
            v = t;
        }
        Word::from_reduced(letters)
    }

    /// Splits a coset `gH` into its tail `v2⁻¹` and the vertex `q` reached by
    /// reading `g⁻¹ = v1·v2` from the basepoint, where `v2` is the unreadable
    /// remainder. Every element of `gH` is `v2⁻¹·p` with `p` a path label from
    /// `q` to the basepoint, and `gΛ(H)` is `v2⁻¹` followed by the infinite
    /// non-backtracking paths from `q`.
    pub fn coset_anchor(&self, g: &Word) -> (Word, usize) {
        let inv = g.inverse();
        let r = self.read(&inv);
        (inv.suffix_from(r.consumed).inverse(), r.vertex)
    }

    /// Shortlex-least element of the left coset `wH`.
    pub fn coset_min_rep(&self, w: &Word) -> Word {
        let (tail, q) = self.coset_anchor(w);
        tail.concat_reduced(&self.path_to_base(q))
            .expect("unreadable letter cannot cancel a readable one")
    }

    /// Word-metric distance from `z` to the coset `gH`.
    pub fn coset_distance(&self, z: &Word, g: &Word) -> usize {
        let (tail, q) = self.coset_anchor(&z.inverse().multiply(g));
        tail.len() + self.depth[q]
    }

    fn alive_state(&self, v: usize, incoming: Option<Letter>) -> bool {
        let stride = 2 * self.rank + 1;
        self.alive[v * stride + incoming.map_or(2 * self.rank, Letter::code)]
    }

    /// Whether some infinite non-backtracking path from `start` begins with
    /// `w`. `incoming` is the letter by which `start` was entered, if any.
    pub fn ray_prefix_from(&self, start: usize, incoming: Option<Letter>, w: &Word) -> bool {
        let mut at = start;
        let mut last = incoming;
        for &l in w.letters() {
            if last == Some(l.inverse()) {
                return false;
            }
            match self.transition(at, l) {
                Some(t) => at = t,
                None => return false,
            }
            last = Some(l);
        }
        self.alive_state(at, last)
    }

    /// Whether the cylinder `[w]` meets `Λ(H)`.
    pub fn limit_prefix_extends(&self, w: &Word) -> bool {
        self.ray_prefix_from(0, None, w)
    }

    /// All length-`n` labels of infinite non-backtracking paths from `start`,
    /// in lexicographic order.
    pub fn ray_prefixes_from(&self, start: usize, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack = vec![(start, None::<Letter>, Word::identity())];
        // depth-first in reverse alphabet order so output is lexicographic
        while let Some((v, last, w)) = stack.pop() {
            if w.len() == n {
                out.push(w);
                continue;
            }
            for l in Letter::alphabet(self.rank).collect::<Vec<_>>().into_iter().rev() {
                if last == Some(l.inverse()) {
                    continue;
                }
                if let Some(t) = self.transition(v, l) {
                    if self.alive_state(t, Some(l)) {
                        let mut next = w.clone();
                        next.push(l);
                        stack.push((t, Some(l), next));
                    }
                }
            }
        }
        out
    }

    /// A vertex from which the periodic word `period^∞` can be read forever,
    /// if one exists. `period` must be cyclically reduced.
    pub fn periodic_vertex(&self, period: &Word) -> Option<usize> {
        let n = self.vertex_count();
        (0..n).find(|&q| {
            let mut at = q;
            for _ in 0..=n {
                let r = self.read_from(at, period);
                if r.consumed < period.len() {
                    return false;
                }
                at = r.vertex;
            }
            true
        })
    }

    /// All elements of `H` of length at most `max_len`, in shortlex order.
    pub fn elements_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut stack = vec![(0usize, Word::identity())];
        while let Some((v, w)) = stack.pop() {
            if w.len() == max_len {
                continue;
            }
            for l in Letter::alphabet(self.rank) {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                if let Some(t) = self.transition(v, l) {
                    let mut next = w.clone();
                    next.push(l);
                    if t == 0 {
                        out.push(next.clone());
                    }
                    stack.push((t, next));
                }
            }
        }
        out.sort();
        out
    }
}

impl fmt::Debug for CoreGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(Word::to_string).collect();
        f.debug_struct("CoreGraph")
            .field("generators", &gens)
            .field("vertices", &self.vertex_count())
            .field("edges", &self.edge_count())
            .field("lambda", &self.quasiconvexity_constant())
            .finish()
    }
}

/// A left coset `gH` of a subgroup in a [`SubgroupCollection`], named by its
/// shortlex-least element. `subgroup` is a 0-based index; display is 1-based
/// to match the default names `H1, H2, …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosetRef {
    pub subgroup: usize,
    pub rep: Word,
}

impl fmt::Display for CosetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·H{}", self.rep, self.subgroup + 1)
    }
}

/// The collection `𝓗 = {H_1, …, H_k}` of subgroups, all of one rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupCollection {
    rank: usize,
    names: Vec<String>,
    cores: Vec<CoreGraph>,
}

impl SubgroupCollection {
    pub fn new(rank: usize, subgroups: Vec<(String, Vec<Word>)>) -> Result<SubgroupCollection> {
        let mut names = Vec::new();
        let mut cores = Vec::new();
        for (name, gens) in subgroups {
            cores.push(CoreGraph::fold(rank, &gens)?);
            names.push(name);
        }
        Ok(SubgroupCollection { rank, names, cores })
    }

    /// Convenience constructor naming the subgroups `H1, H2, …`.
    pub fn from_generators(rank: usize, subgroups: &[&[&str]]) -> Result<SubgroupCollection> {
        let mut list = Vec::new();
        for (i, gens) in subgroups.iter().enumerate() {
            let words = gens
                .iter()
                .map(|g| Word::parse(g, rank))
                .collect::<Result<Vec<_>>>()?;
            list.push((format!("H{}", i + 1), words));
        }
        SubgroupCollection::new(rank, list)
    }

    pub fn empty(rank: usize) -> SubgroupCollection {
        SubgroupCollection {
            rank,
            names: Vec::new(),
            cores: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn cores(&self) -> &[CoreGraph] {
        &self.cores
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn core(&self, i: usize) -> Result<&CoreGraph> {
        self.cores.get(i).ok_or(Error::NoSuchSubgroup {
            index: i,
            len: self.cores.len(),
        })
    }

    /// Largest quasiconvexity constant in the collection (0 if empty).
    pub fn lambda_max(&self) -> usize {
        self.cores
            .iter()
            .map(CoreGraph::quasiconvexity_constant)
            .max()
            .unwrap_or(0)
    }

    /// Canonical reference for the coset `g·H_subgroup`.
    pub fn coset(&self, subgroup: usize, g: &Word) -> Result<CosetRef> {
        Ok(CosetRef {
            subgroup,
            rep: self.core(subgroup)?.coset_min_rep(g),
        })
    }
}
