//! Almost malnormality via fiber products of core graphs, and bounded coset
//! intersection diameters.
//!
//! In a free group every nontrivial subgroup is infinite, so an intersection
//! `H_i ∩ g⁻¹H_j g` is infinite exactly when it is nontrivial. Such an
//! intersection shows up as a cycle in the fiber product of the two core
//! graphs, in a component other than the one through the basepoint pair when
//! `i = j`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Limits;
use crate::stallings::{CoreGraph, CosetRef, SubgroupCollection};
use crate::word::{ball_size, words_up_to, Letter, Word};

/// One connected component of the fiber product of two core graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductComponent {
    /// All vertex pairs of the component, sorted.
    pub vertices: Vec<(usize, usize)>,
    /// Pairs surviving after hanging trees are trimmed; empty for trees.
    pub core_vertices: Vec<(usize, usize)>,
    pub contains_basepoint_pair: bool,
    pub betti_number: usize,
    /// Vertex at which `cycle` is based.
    pub root: (usize, usize),
    /// Reduced label of an embedded loop at `root`, present iff the component
    /// has a cycle.
    pub cycle: Option<Word>,
}

/// Connected components of the pullback of `first` and `second`: vertex pairs
/// joined by an edge whenever both factors carry the same letter. Components
/// without edges are omitted unless they hold the basepoint pair.
pub fn fiber_product(first: &CoreGraph, second: &CoreGraph) -> Vec<ProductComponent> {
    assert_eq!(first.rank(), second.rank(), "cores of different rank");
    let rank = first.rank();
    let (n1, n2) = (first.vertex_count(), second.vertex_count());
    let id = |u: usize, v: usize| u * n2 + v;
    let step = |(u, v): (usize, usize), l: Letter| -> Option<(usize, usize)> {
        Some((first.transition(u, l)?, second.transition(v, l)?))
    };

    let mut component = vec![usize::MAX; n1 * n2];
    let mut out = Vec::new();
    for start in (0..n1).flat_map(|u| (0..n2).map(move |v| (u, v))) {
        if component[id(start.0, start.1)] != usize::MAX {
            continue;
        }
        let index = out.len();
        let mut vertices = vec![start];
        let mut queue = VecDeque::from([start]);
        component[id(start.0, start.1)] = index;
        let mut half_edges = 0usize;
        while let Some(p) = queue.pop_front() {
            for l in Letter::alphabet(rank) {
                if let Some(t) = step(p, l) {
                    half_edges += 1;
                    if component[id(t.0, t.1)] == usize::MAX {
                        component[id(t.0, t.1)] = index;
                        vertices.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let edges = half_edges / 2;
        let contains_basepoint_pair = component[id(0, 0)] == index;
        if edges == 0 && !contains_basepoint_pair {
            // mark as visited without recording a component
            continue;
        }
        vertices.sort_unstable();
        let betti_number = edges + 1 - vertices.len();
        let core_vertices = trim_to_core(&vertices, step, rank);
        let root = if contains_basepoint_pair {
            (0, 0)
        } else {
            core_vertices.first().copied().unwrap_or(vertices[0])
        };
        let cycle = (betti_number > 0).then(|| component_cycle(root, step, rank));
        out.push(ProductComponent {
            vertices,
            core_vertices,
            contains_basepoint_pair,
            betti_number,
            root,
            cycle,
        });
    }
    // components are discovered with increasing smallest vertex, but the
    // skipped edgeless ones shift indices; keep discovery order
    out
}

fn trim_to_core<F>(vertices: &[(usize, usize)], step: F, rank: usize) -> Vec<(usize, usize)>
where
    F: Fn((usize, usize), Letter) -> Option<(usize, usize)>,
{
    let mut removed: BTreeSet<(usize, usize)> = BTreeSet::new();
    let degree = |p: (usize, usize), removed: &BTreeSet<(usize, usize)>| {
        Letter::alphabet(rank)
            .filter(|&l| step(p, l).is_some_and(|t| !removed.contains(&t)))
            .count()
    };
    loop {
        let leaves: Vec<_> = vertices
            .iter()
            .copied()
            .filter(|p| !removed.contains(p) && degree(*p, &removed) <= 1)
            .collect();
        if leaves.is_empty() {
            break;
        }
        removed.extend(leaves);
    }
    vertices
        .iter()
        .copied()
        .filter(|p| !removed.contains(p))
        .collect()
}

/// A loop at `root` through the first non-tree edge of a breadth-first
/// spanning tree.
fn component_cycle<F>(root: (usize, usize), step: F, rank: usize) -> Word
where
    F: Fn((usize, usize), Letter) -> Option<(usize, usize)>,
{
    let mut parent: HashMap<(usize, usize), ((usize, usize), Letter)> = HashMap::new();
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut tree_edges: BTreeSet<((usize, usize), Letter)> = BTreeSet::new();
    let mut order = Vec::new();
    while let Some(p) = queue.pop_front() {
        order.push(p);
        for l in Letter::alphabet(rank) {
            if let Some(t) = step(p, l) {
                if seen.insert(t) {
                    parent.insert(t, (p, l));
                    tree_edges.insert((p, l));
                    tree_edges.insert((t, l.inverse()));
                    queue.push_back(t);
                }
            }
        }
    }
    let path_from_root = |mut p: (usize, usize)| -> Word {
        let mut rev = Vec::new();
        while let Some(&(q, l)) = parent.get(&p) {
            rev.push(l);
            p = q;
        }
        rev.reverse();
        crate::word::reduce(rev)
    };
    for p in order {
        for l in Letter::alphabet(rank) {
            if let Some(t) = step(p, l) {
                if !tree_edges.contains(&(p, l)) {
                    let loop_word = path_from_root(p)
                        .multiply(&Word::letter(l))
                        .multiply(&path_from_root(t).inverse());
                    debug_assert!(!loop_word.is_identity());
                    return loop_word;
                }
            }
        }
    }
    unreachable!("component with positive Betti number has a non-tree edge")
}

/// Witness of a failure of almost malnormality: `element ≠ 1` lies in
/// `H_i ∩ g⁻¹H_j g`, and `(i, g)` is not of the exempt form `i = j, g ∈ H_i`.
/// In a free group a nontrivial intersection is infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalnormalWitness {
    pub g: Word,
    pub i: usize,
    pub j: usize,
    pub element: Word,
}

impl MalnormalWitness {
    /// Re-verifies the witness by direct word arithmetic.
    pub fn check(&self, collection: &SubgroupCollection) -> bool {
        let (Ok(hi), Ok(hj)) = (collection.core(self.i), collection.core(self.j)) else {
            return false;
        };
        let conjugated = self.g.multiply(&self.element).multiply(&self.g.inverse());
        !self.element.is_identity()
            && hi.membership(&self.element)
            && hj.membership(&conjugated)
            && !(self.i == self.j && hi.membership(&self.g))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalnormalityCertificate {
    pub verdict: bool,
    pub witness: Option<MalnormalWitness>,
}

impl MalnormalityCertificate {
    pub fn check(&self, collection: &SubgroupCollection) -> bool {
        match (&self.witness, self.verdict) {
            (None, true) => true,
            (Some(w), false) => w.check(collection),
            _ => false,
        }
    }

    /// Converts a negative verdict into the error refused by constructions
    /// that need malnormality.
    pub fn require(&self) -> Result<()> {
        match &self.witness {
            Some(w) => Err(Error::NotMalnormal {
                g: w.g.clone(),
                i: w.i,
                j: w.j,
                element: w.element.clone(),
            }),
            None => Ok(()),
        }
    }
}

/// Exact decision of almost malnormality over all ordered pairs `(i, j)`.
/// A negative verdict carries the shortest witness `g` found among the
/// cyclic components and their mirror images `(g⁻¹, j, i)`.
pub fn is_almost_malnormal(collection: &SubgroupCollection) -> Result<MalnormalityCertificate> {
    if collection.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let mut best: Option<MalnormalWitness> = None;
    let mut offer = |cand: MalnormalWitness| {
        let key = |w: &MalnormalWitness| (w.g.clone(), w.i, w.j, w.element.clone());
        if best.as_ref().is_none_or(|b| key(&cand) < key(b)) {
            best = Some(cand);
        }
    };
    for (i, hi) in collection.cores().iter().enumerate() {
        for (j, hj) in collection.cores().iter().enumerate() {
            for comp in fiber_product(hi, hj) {
                if comp.betti_number == 0 || (i == j && comp.contains_basepoint_pair) {
                    continue;
                }
                let cycle = comp.cycle.expect("cyclic component has a cycle");
                let (u, v) = comp.root;
                let p = hi.path_to_base(u).inverse();
                let q = hj.path_to_base(v).inverse();
                let g = q.multiply(&p.inverse());
                let element = p.multiply(&cycle).multiply(&p.inverse());
                let mirrored = g.multiply(&element).multiply(&g.inverse());
                offer(MalnormalWitness {
                    g: g.inverse(),
                    i: j,
                    j: i,
                    element: shorter_sign(mirrored),
                });
                offer(MalnormalWitness {
                    g,
                    i,
                    j,
                    element: shorter_sign(element),
                });
            }
        }
    }
    debug_assert!(best.as_ref().is_none_or(|w| w.check(collection)));
    Ok(MalnormalityCertificate {
        verdict: best.is_none(),
        witness: best,
    })
}

fn shorter_sign(w: Word) -> Word {
    let inv = w.inverse();
    w.min(inv)
}

/// Diameter of a possibly empty set. The empty set is kept distinct from a
/// singleton (diameter 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diameter {
    Empty,
    Value(usize),
}

impl Diameter {
    pub fn value(self) -> Option<usize> {
        match self {
            Diameter::Empty => None,
            Diameter::Value(d) => Some(d),
        }
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diameter::Empty => write!(f, "EMPTY"),
            Diameter::Value(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for Diameter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Diameter::Empty => s.serialize_str("EMPTY"),
            Diameter::Value(d) => s.serialize_u64(*d as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Diameter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Value(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Value(v) => Ok(Diameter::Value(v as usize)),
            Raw::Text(t) if t == "EMPTY" => Ok(Diameter::Empty),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad diameter {t:?}"))),
        }
    }
}

/// Diameter of a finite set of tree vertices by double sweep, which is exact
/// for subsets of a tree.
pub fn tree_diameter<'a, I>(points: I) -> Diameter
where
    I: IntoIterator<Item = &'a Word>,
    I::IntoIter: Clone,
{
    let it = points.into_iter();
    let Some(start) = it.clone().next() else {
        return Diameter::Empty;
    };
    let far = it
        .clone()
        .max_by_key(|p| (start.distance(p), std::cmp::Reverse(*p)))
        .unwrap();
    Diameter::Value(it.map(|p| far.distance(p)).max().unwrap())
}

/// `diam(N_R(g₁H₁) ∩ N_R(g₂H₂))` restricted to the ball of radius
/// `ball_radius`, with exact coset distances.
pub fn coset_intersection_diameter(
    collection: &SubgroupCollection,
    c1: &CosetRef,
    c2: &CosetRef,
    r: usize,
    ball_radius: usize,
    limits: &Limits,
) -> Result<Diameter> {
    if c1 == c2 {
        return Err(Error::CosetEqual);
    }
    if ball_radius < r {
        return Err(Error::InvalidArgument(format!(
            "ball radius {ball_radius} is smaller than R = {r}"
        )));
    }
    let (h1, h2) = (collection.core(c1.subgroup)?, collection.core(c2.subgroup)?);
    limits.check(
        "ball vertices",
        ball_size(collection.rank(), ball_radius),
        limits.max_ball_vertices,
    )?;
    let hits: Vec<Word> = words_up_to(collection.rank(), ball_radius)
        .filter(|w| h1.coset_distance(w, &c1.rep) <= r && h2.coset_distance(w, &c2.rep) <= r)
        .collect();
    Ok(tree_diameter(&hits))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BciSample {
    pub first: CosetRef,
    pub second: CosetRef,
    pub diameter: Diameter,
}

/// Empirical bound `D` for `diam(N_R(gH) ∩ N_R(g′H′)) < D` at one ball radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BciReport {
    #[serde(rename = "R")]
    pub r: usize,
    pub ball_radius: usize,
    pub generating_set: String,
    pub samples: Vec<BciSample>,
    /// One more than the largest observed diameter, and at least 1.
    pub d_emp: usize,
}

/// The words of `N_R(H) ∩ B(ball_radius)`.
fn subgroup_neighborhood(core: &CoreGraph, offsets: &[Word], ball_radius: usize) -> BTreeSet<Word> {
    let r = offsets.last().map_or(0, Word::len);
    let mut out = BTreeSet::new();
    for h in core.elements_up_to(ball_radius + r) {
        for u in offsets {
            let x = h.multiply(u);
            if x.len() <= ball_radius {
                out.insert(x);
            }
        }
    }
    out
}

/// Samples distinct coset pairs and records their intersection diameters.
///
/// Left multiplication is an isometry, so every pair `(g₁H₁, g₂H₂)` is
/// congruent to `(H₁, g₁⁻¹g₂H₂)`; the first coset therefore ranges over the
/// subgroups themselves. The second ranges over every coset, with
/// representative of length at most `ball_radius − R`, that comes within `R`
/// of `N_R(H₁) ∩ B(ball_radius)`; all others give an empty intersection.
pub fn bci_report(
    collection: &SubgroupCollection,
    r: usize,
    ball_radius: usize,
    limits: &Limits,
) -> Result<BciReport> {
    if collection.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if ball_radius < r {
        return Err(Error::InvalidArgument(format!(
            "ball radius {ball_radius} is smaller than R = {r}"
        )));
    }
    let rank = collection.rank();
    let offsets: Vec<Word> = words_up_to(rank, r).collect();
    let mut samples = Vec::new();
    for (i, hi) in collection.cores().iter().enumerate() {
        let first = CosetRef {
            subgroup: i,
            rep: Word::identity(),
        };
        let near = subgroup_neighborhood(hi, &offsets, ball_radius);
        limits.check("ball vertices", near.len() as u128, limits.max_ball_vertices)?;
        // w ∈ N_R(c) iff w·u ∈ c for some |u| ≤ R
        let mut hits: BTreeMap<CosetRef, BTreeSet<&Word>> = BTreeMap::new();
        for w in &near {
            for u in &offsets {
                let x = w.multiply(u);
                for (j, hj) in collection.cores().iter().enumerate() {
                    let rep = hj.coset_min_rep(&x);
                    if rep.len() + r <= ball_radius {
                        hits.entry(CosetRef { subgroup: j, rep }).or_default().insert(w);
                    }
                }
            }
            limits.check("cosets", hits.len() as u128, limits.max_cosets)?;
        }
        hits.remove(&first);
        for (second, points) in hits {
            samples.push(BciSample {
                first: first.clone(),
                second,
                diameter: tree_diameter(points.iter().copied()),
            });
        }
    }
    let d_emp = samples
        .iter()
        .filter_map(|s| s.diameter.value())
        .max()
        .map_or(1, |d| d + 1);
    Ok(BciReport {
        r,
        ball_radius,
        generating_set: crate::GENERATING_SET.to_string(),
        samples,
        d_emp,
    })
}

/// `D_emp` for each ball radius, as `(ball_radius, D_emp)` rows.
pub fn bci_sweep(
    collection: &SubgroupCollection,
    r: usize,
    ball_radii: &[usize],
    limits: &Limits,
) -> Result<BTreeMap<usize, usize>> {
    ball_radii
        .iter()
        .map(|&n| Ok((n, bci_report(collection, r, n, limits)?.d_emp)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn coll(gens: &[&[&str]]) -> SubgroupCollection {
        SubgroupCollection::from_generators(2, gens).unwrap()
    }

    fn cyclic_components(c: &SubgroupCollection, i: usize, j: usize) -> Vec<ProductComponent> {
        fiber_product(&c.cores()[i], &c.cores()[j])
            .into_iter()
            .filter(|p| p.betti_number > 0)
            .collect()
    }

    #[test]
    fn fiber_product_examples() {
        let c = coll(&[&["a"], &["b"]]);
        assert!(cyclic_components(&c, 0, 1).is_empty());

        let c = coll(&[&["a"]]);
        let comps = cyclic_components(&c, 0, 0);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].contains_basepoint_pair);
        assert_eq!(comps[0].cycle, Some(w("a")));

        let c = coll(&[&["aa", "bb"]]);
        let comps = cyclic_components(&c, 0, 0);
        let off: Vec<_> = comps.iter().filter(|p| !p.contains_basepoint_pair).collect();
        assert!(!off.is_empty());
        assert!(off.iter().any(|p| p.cycle.as_ref().is_some_and(|c| c.len() == 2)));
    }

    #[test]
    fn malnormal_examples() {
        let c = coll(&[&["a"]]);
        assert_eq!(
            is_almost_malnormal(&c).unwrap(),
            MalnormalityCertificate {
                verdict: true,
                witness: None
            }
        );
        let c = coll(&[&["aa", "bb"]]);
        let cert = is_almost_malnormal(&c).unwrap();
        assert!(!cert.verdict);
        let wit = cert.witness.clone().unwrap();
        assert_eq!((wit.g.clone(), wit.element.clone()), (w("a"), w("aa")));
        assert!(cert.check(&c));
        assert_eq!(cert.require().unwrap_err().code(), "NOT_MALNORMAL");

        assert!(is_almost_malnormal(&coll(&[&["a"], &["b"]])).unwrap().verdict);
        assert_eq!(
            is_almost_malnormal(&SubgroupCollection::empty(2)).unwrap_err(),
            Error::EmptyCollection
        );
    }

    #[test]
    fn conjugate_pair_is_not_malnormal() {
        let c = coll(&[&["a"], &["baB"]]);
        let cert = is_almost_malnormal(&c).unwrap();
        assert!(!cert.verdict);
        assert!(cert.check(&c));
    }

    #[test]
    fn diameter_examples() {
        let lim = Limits::default();
        let c = coll(&[&["a"]]);
        let h = c.coset(0, &w("1")).unwrap();
        let bh = c.coset(0, &w("b")).unwrap();
        assert_eq!(
            coset_intersection_diameter(&c, &h, &bh, 1, 6, &lim).unwrap(),
            Diameter::Value(1)
        );
        assert_eq!(
            coset_intersection_diameter(&c, &h, &bh, 0, 6, &lim).unwrap(),
            Diameter::Empty
        );
        assert_eq!(
            coset_intersection_diameter(&c, &h, &h, 1, 6, &lim).unwrap_err(),
            Error::CosetEqual
        );

        let c = coll(&[&["aa", "bb"]]);
        let h = c.coset(0, &w("1")).unwrap();
        let ah = c.coset(0, &w("a")).unwrap();
        let d = coset_intersection_diameter(&c, &h, &ah, 1, 6, &lim).unwrap();
        assert!(d >= Diameter::Value(10), "{d}");
    }

    #[test]
    fn diameter_serde() {
        let v = serde_json::to_string(&[Diameter::Empty, Diameter::Value(3)]).unwrap();
        assert_eq!(v, r#"["EMPTY",3]"#);
        let back: Vec<Diameter> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, [Diameter::Empty, Diameter::Value(3)]);
    }

    #[test]
    fn report_agrees_with_ball_scan() {
        let lim = Limits::default();
        let c = coll(&[&["a"], &["b"]]);
        let report = bci_report(&c, 1, 5, &lim).unwrap();
        assert!(!report.samples.is_empty());
        for s in &report.samples {
            let direct = coset_intersection_diameter(&c, &s.first, &s.second, 1, 5, &lim).unwrap();
            assert_eq!(direct, s.diameter, "{} vs {}", s.first, s.second);
        }
        assert!(report
            .samples
            .iter()
            .all(|s| s.diameter.value() < Some(report.d_emp)));
    }
}
