//! Finite metric graphs: balls in the free Cayley tree, imported graphs, and
//! the four-point hyperbolicity constant.

use std::collections::{HashMap, VecDeque};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{ball_size, words_up_to, Word};

/// Dense distance tables are kept below 128 MiB.
const MAX_TABLE_ENTRIES: u128 = 1 << 26;

/// Rationals as `"p/q"` text (or `"p"` for integers).
mod rational_text {
    use num_rational::Rational64;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// The group under study: a free group of the given rank with its free-basis
/// Cayley graph, which is a tree (`delta = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub rank: usize,
    #[serde(with = "rational_text")]
    pub delta: Rational64,
}

impl GroupSpec {
    pub fn free(rank: usize) -> Result<GroupSpec> {
        if !(2..=crate::word::MAX_RANK).contains(&rank) {
            return Err(Error::InvalidArgument(format!(
                "rank must be between 2 and {}, got {rank}",
                crate::word::MAX_RANK
            )));
        }
        Ok(GroupSpec {
            rank,
            delta: Rational64::from(0),
        })
    }

    /// `δ` rounded up, for the integer radii built from it.
    pub fn delta_ceil(&self) -> usize {
        self.delta.ceil().to_integer().max(0) as usize
    }
}

/// Resource caps. Defaults: 10⁶ ball vertices, 10⁸ quadruples, 10⁶ cosets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_ball_vertices: u128,
    pub max_quadruples: u128,
    pub max_cosets: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_ball_vertices: 1_000_000,
            max_quadruples: 100_000_000,
            max_cosets: 1_000_000,
        }
    }
}

impl Limits {
    pub(crate) fn check(&self, what: &'static str, needed: u128, cap: u128) -> Result<()> {
        if needed > cap {
            Err(Error::ResourceLimit { what, needed, cap })
        } else {
            Ok(())
        }
    }
}

/// A finite connected graph with unit edge lengths and a basepoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricBallGraph {
    labels: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    basepoint: usize,
}

impl MetricBallGraph {
    /// Builds a graph from labels and an undirected edge list. Fails unless the
    /// graph is connected.
    pub fn from_edges(
        labels: Vec<String>,
        edges: &[(usize, usize)],
        basepoint: usize,
    ) -> Result<MetricBallGraph> {
        let n = labels.len();
        if basepoint >= n {
            return Err(Error::InvalidGraph("basepoint out of range".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {}", labels[u])));
            }
            if !adjacency[u].contains(&v) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let graph = MetricBallGraph {
            labels,
            adjacency,
            basepoint,
        };
        if graph.bfs(basepoint).iter().any(|d| d.is_none()) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    /// Parses the adjacency-list text format: the first non-comment line names
    /// the basepoint, every later line holds one edge `u v`. Vertex ids are
    /// arbitrary tokens; `#` starts a comment.
    pub fn parse_adjacency(text: &str) -> Result<MetricBallGraph> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut intern = |s: &str, labels: &mut Vec<String>| -> usize {
            *ids.entry(s.to_string()).or_insert_with(|| {
                labels.push(s.to_string());
                labels.len() - 1
            })
        };
        let mut basepoint = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match (basepoint, toks.as_slice()) {
                (None, [b]) => basepoint = Some(intern(b, &mut labels)),
                (None, _) => {
                    return Err(Error::InvalidGraph(format!(
                        "line {}: expected a single basepoint id",
                        lineno + 1
                    )))
                }
                (Some(_), [u, v]) => {
                    let (u, v) = (intern(u, &mut labels), intern(v, &mut labels));
                    edges.push((u, v));
                }
                (Some(_), _) => {
                    return Err(Error::InvalidGraph(format!(
                        "line {}: expected an edge `u v`",
                        lineno + 1
                    )))
                }
            }
        }
        let basepoint = basepoint.ok_or_else(|| Error::InvalidGraph("empty graph".into()))?;
        MetricBallGraph::from_edges(labels, &edges, basepoint)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    fn bfs(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All-pairs shortest-path table, row-major.
    pub fn distance_table(&self, limits: &Limits) -> Result<DistanceTable> {
        let n = self.vertex_count();
        limits.check("distance table entries", (n as u128).pow(2), MAX_TABLE_ENTRIES)?;
        let mut table = Vec::with_capacity(n * n);
        for s in 0..n {
            table.extend(self.bfs(s).into_iter().map(|d| d.unwrap() as u16));
        }
        Ok(DistanceTable { n, table })
    }
}

/// Dense all-pairs distance table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    table: Vec<u16>,
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.table[u * self.n + v] as u32
    }

    pub fn row(&self, u: usize) -> &[u16] {
        &self.table[u * self.n..(u + 1) * self.n]
    }
}

/// The ball of the given radius in the Cayley tree of the free group, with
/// vertices labelled by their words in shortlex order (vertex 0 is the
/// identity).
pub fn build_ball(spec: &GroupSpec, radius: usize, limits: &Limits) -> Result<MetricBallGraph> {
    let size = ball_size(spec.rank, radius);
    limits.check("ball vertices", size, limits.max_ball_vertices)?;
    let words: Vec<Word> = words_up_to(spec.rank, radius).collect();
    let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut edges = Vec::with_capacity(words.len().saturating_sub(1));
    for (i, w) in words.iter().enumerate().skip(1) {
        let parent = w.prefix(w.len() - 1);
        edges.push((index[&parent], i));
    }
    let labels = words.iter().map(Word::to_string).collect();
    let graph = MetricBallGraph::from_edges(labels, &edges, 0)?;
    debug_assert_eq!(graph.edge_count() + 1, graph.vertex_count());
    Ok(graph)
}

/// Result of a four-point scan. `exact` is false when the quadruple budget
/// forced random sampling, in which case `delta` is only a lower bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    #[serde(with = "rational_text")]
    pub delta: Rational64,
    pub exact: bool,
    pub quadruples: u128,
    pub witness: Option<[usize; 4]>,
}

#[inline]
fn quadruple_defect(d: &DistanceTable, x: usize, y: usize, z: usize, w: usize) -> u32 {
    let s1 = d.get(x, y) + d.get(z, w);
    let s2 = d.get(x, z) + d.get(y, w);
    let s3 = d.get(x, w) + d.get(y, z);
    let (hi, mid) = if s1 >= s2 {
        if s2 >= s3 {
            (s1, s2)
        } else if s1 >= s3 {
            (s1, s3)
        } else {
            (s3, s1)
        }
    } else if s1 >= s3 {
        (s2, s1)
    } else if s2 >= s3 {
        (s2, s3)
    } else {
        (s3, s2)
    };
    hi - mid
}

/// Four-point hyperbolicity constant: the maximum over quadruples of half the
/// gap between the two largest of the three pairwise distance sums. This is
/// the least `δ` with `(x|y)_w ≥ min((x|z)_w, (z|y)_w) − δ` everywhere.
///
/// Above `limits.max_quadruples` unordered quadruples, `samples` random
/// quadruples drawn from `seed` are scanned instead and the result is flagged
/// as a lower bound.
pub fn four_point_delta(graph: &MetricBallGraph, limits: &Limits, seed: u64) -> Result<DeltaEstimate> {
    let n = graph.vertex_count();
    let d = graph.distance_table(limits)?;
    let total = if n < 4 {
        0
    } else {
        let n = n as u128;
        n * (n - 1) * (n - 2) * (n - 3) / 24
    };
    let mut best = 0u32;
    let mut witness = None;
    if total <= limits.max_quadruples {
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    let (dxy, dxz, dyz) = (d.get(x, y), d.get(x, z), d.get(y, z));
                    let (rx, ry, rz) = (d.row(x), d.row(y), d.row(z));
                    for w in z + 1..n {
                        let s1 = dxy + rz[w] as u32;
                        let s2 = dxz + ry[w] as u32;
                        let s3 = dyz + rx[w] as u32;
                        let hi = s1.max(s2).max(s3);
                        let mid = if hi == s1 {
                            s2.max(s3)
                        } else if hi == s2 {
                            s1.max(s3)
                        } else {
                            s1.max(s2)
                        };
                        if hi - mid > best {
                            best = hi - mid;
                            witness = Some([x, y, z, w]);
                        }
                    }
                }
            }
        }
        Ok(DeltaEstimate {
            delta: Rational64::new(best as i64, 2),
            exact: true,
            quadruples: total,
            witness,
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = limits.max_quadruples;
        for _ in 0..samples {
            let q = [
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            ];
            let defect = quadruple_defect(&d, q[0], q[1], q[2], q[3]);
            if defect > best {
                best = defect;
                witness = Some(q);
            }
        }
        Ok(DeltaEstimate {
            delta: Rational64::new(best as i64, 2),
            exact: false,
            quadruples: samples,
            witness,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> MetricBallGraph {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        MetricBallGraph::from_edges(labels, &edges, 0).unwrap()
    }

    #[test]
    fn ball_examples() {
        let spec = GroupSpec::free(2).unwrap();
        let lim = Limits::default();
        let b0 = build_ball(&spec, 0, &lim).unwrap();
        assert_eq!((b0.vertex_count(), b0.edge_count()), (1, 0));
        let b1 = build_ball(&spec, 1, &lim).unwrap();
        assert_eq!((b1.vertex_count(), b1.edge_count()), (5, 4));
        assert_eq!(build_ball(&spec, 3, &lim).unwrap().vertex_count(), 53);
    }

    #[test]
    fn ball_cap() {
        let spec = GroupSpec::free(2).unwrap();
        let lim = Limits {
            max_ball_vertices: 50,
            ..Limits::default()
        };
        let err = build_ball(&spec, 3, &lim).unwrap_err();
        assert_eq!(err.code(), "RESOURCE_LIMIT");
    }

    #[test]
    fn delta_of_small_graphs() {
        let lim = Limits::default();
        let single = MetricBallGraph::from_edges(vec!["x".into()], &[], 0).unwrap();
        assert_eq!(
            four_point_delta(&single, &lim, 0).unwrap().delta,
            Rational64::from(0)
        );
        let spec = GroupSpec::free(2).unwrap();
        let ball = build_ball(&spec, 2, &lim).unwrap();
        let est = four_point_delta(&ball, &lim, 0).unwrap();
        assert!(est.exact);
        assert_eq!(est.delta, Rational64::from(0));
        // brute-force value for the 8-cycle, frozen
        assert_eq!(
            four_point_delta(&cycle(8), &lim, 0).unwrap().delta,
            Rational64::from(2)
        );
    }

    #[test]
    fn sampling_fallback_is_flagged() {
        let lim = Limits {
            max_quadruples: 20,
            ..Limits::default()
        };
        let est = four_point_delta(&cycle(8), &lim, 7).unwrap();
        assert!(!est.exact);
        assert!(est.delta <= Rational64::from(2));
    }

    #[test]
    fn adjacency_format() {
        let g = MetricBallGraph::parse_adjacency("# square\nv0\nv0 v1\nv1 v2\nv2 v3\nv3 v0\n").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.label(g.basepoint()), "v0");
        assert!(MetricBallGraph::parse_adjacency("0\n0 1\n2 3\n").is_err());
        assert!(MetricBallGraph::parse_adjacency("0 1\n").is_err());
    }
}
