//! Depth-`n` approximations of the quotient of `∂G` obtained by collapsing
//! every translate `gΛ(H)` to a point.
//!
//! The boundary is covered by the `2r(2r−1)^{n−1}` cylinders of depth `n`.
//! Two cylinders are identified when some translate of a limit set meets
//! both, and the partition is the transitive closure of that relation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::malnormal::is_almost_malnormal;
use crate::metric::Limits;
use crate::stallings::{CoreGraph, CosetRef, SubgroupCollection};
use crate::word::{cylinder_at, cylinder_index, sphere_size, Letter, Word};

/// Whether `gΛ(H)` meets the cylinder `[w]`.
pub fn translate_meets_cylinder(core: &CoreGraph, g: &Word, w: &Word) -> bool {
    let (tail, q) = core.coset_anchor(g);
    if tail.len() >= w.len() {
        w.is_prefix_of(&tail)
    } else {
        tail.is_prefix_of(w) && core.ray_prefix_from(q, None, &w.suffix_from(tail.len()))
    }
}

/// The depth-`n` cylinders meeting `gΛ(H)`, in lexicographic order.
pub fn translate_cylinders(core: &CoreGraph, g: &Word, n: usize) -> Vec<Word> {
    let (tail, q) = core.coset_anchor(g);
    if tail.len() >= n {
        return vec![tail.prefix(n)];
    }
    core.ray_prefixes_from(q, n - tail.len())
        .into_iter()
        .map(|p| {
            tail.concat_reduced(&p)
                .expect("anchor tail and rays do not cancel")
        })
        .collect()
}

/// Cosets `gH_i` whose limit set meets at least two depth-`n` cylinders,
/// sorted. Each has representative length at most `n − 1 + λ_max`.
///
/// A coset is determined by its anchor `(tail, q)`: the vertex `q` of the core
/// graph and a reduced `tail` whose last letter, inverted, cannot be read at
/// `q`. Its limit set lies in `[tail]` and splits across cylinders only when
/// `|tail| < n` and the rays from `q` branch before depth `n − |tail|`, so the
/// enumeration below is exhaustive.
pub fn separating_cosets(
    collection: &SubgroupCollection,
    n: usize,
    limits: &Limits,
) -> Result<Vec<CosetRef>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let rank = collection.rank();
    let mut out = Vec::new();
    for (i, core) in collection.cores().iter().enumerate() {
        for q in 0..core.vertex_count() {
            let readable: Vec<Letter> = Letter::alphabet(rank)
                .filter(|&l| core.transition(q, l).is_some())
                .collect();
            let to_base = core.path_to_base(q);
            // grow tails right to left: tail = x_k … x_1 with x_1⁻¹ unreadable
            let mut level = vec![Word::identity()];
            for t in 0..n {
                let mut next = Vec::new();
                let split = core.ray_prefixes_from(q, n - t).len() >= 2;
                for tail in &level {
                    if split {
                        out.push(CosetRef {
                            subgroup: i,
                            rep: tail.concat_reduced(&to_base).expect("reduced anchor"),
                        });
                        limits.check("cosets", out.len() as u128, limits.max_cosets)?;
                    }
                    for l in Letter::alphabet(rank) {
                        let ok = match tail.first() {
                            None => !readable.contains(&l.inverse()),
                            Some(f) => f != l.inverse(),
                        };
                        if ok {
                            next.push(Word::letter(l).multiply(tail));
                        }
                    }
                }
                level = next;
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    /// Union of cylinders hit by the listed translates. Several translates can
    /// share a class when their cylinder hulls overlap at this depth.
    Parabolic {
        cosets: Vec<CosetRef>,
    },
    Singleton,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionClass {
    pub cylinders: Vec<Word>,
    #[serde(flatten)]
    pub kind: ClassKind,
}

/// Partition of the depth-`n` cylinders. Classes are numbered by their least
/// cylinder in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderPartition {
    pub rank: usize,
    pub depth: usize,
    pub classes: Vec<PartitionClass>,
    #[serde(skip)]
    class_of: Vec<u32>,
}

impl CylinderPartition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn cylinder_count(&self) -> usize {
        self.class_of.len()
    }

    /// Class of the cylinder `[w]`, for `|w| = depth`.
    pub fn class_of(&self, w: &Word) -> usize {
        assert_eq!(w.len(), self.depth, "cylinder of wrong depth");
        self.class_of[cylinder_index(self.rank, w)] as usize
    }

    /// Class containing the depth-`n` prefix of `w`, for `|w| ≥ depth`.
    pub fn class_of_prefix(&self, w: &Word) -> usize {
        self.class_of(&w.prefix(self.depth))
    }

    /// Class holding the translate `c`, if `c` separates at this depth.
    pub fn class_of_coset(&self, c: &CosetRef) -> Option<usize> {
        self.classes.iter().position(|k| match &k.kind {
            ClassKind::Parabolic { cosets } => cosets.contains(c),
            ClassKind::Singleton => false,
        })
    }

    /// Rebuilds the cylinder lookup after deserialization.
    pub fn reindex(&mut self) {
        let count = sphere_size(self.rank, self.depth) as usize;
        self.class_of = vec![u32::MAX; count];
        for (k, class) in self.classes.iter().enumerate() {
            for w in &class.cylinders {
                self.class_of[cylinder_index(self.rank, w)] = k as u32;
            }
        }
    }
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n as u32).collect())
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let up = self.0[self.0[x as usize] as usize];
            self.0[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi as usize] = lo;
        }
    }
}

/// The depth-`n` cylinder partition. Requires an almost malnormal collection.
pub fn decomposition_partition(
    collection: &SubgroupCollection,
    n: usize,
    limits: &Limits,
) -> Result<CylinderPartition> {
    if collection.is_empty() {
        return Err(Error::EmptyCollection);
    }
    is_almost_malnormal(collection)?.require()?;
    partition_unchecked(collection, n, limits)
}

fn partition_unchecked(
    collection: &SubgroupCollection,
    n: usize,
    limits: &Limits,
) -> Result<CylinderPartition> {
    if n == 0 {
        return Err(Error::InvalidArgument("partition depth must be positive".into()));
    }
    let rank = collection.rank();
    let count = sphere_size(rank, n);
    limits.check("cylinders", count, limits.max_ball_vertices)?;
    let count = count as usize;
    let mut uf = UnionFind::new(count);
    let separating = separating_cosets(collection, n, limits)?;
    let mut hits: Vec<(u32, &CosetRef)> = Vec::with_capacity(separating.len());
    for c in &separating {
        let core = &collection.cores()[c.subgroup];
        let cyl = translate_cylinders(core, &c.rep, n);
        let first = cylinder_index(rank, &cyl[0]) as u32;
        for w in &cyl[1..] {
            uf.union(first, cylinder_index(rank, w) as u32);
        }
        hits.push((first, c));
    }

    let mut class_of = vec![u32::MAX; count];
    let mut classes: Vec<PartitionClass> = Vec::new();
    let mut root_class: BTreeMap<u32, u32> = BTreeMap::new();
    for idx in 0..count {
        let root = uf.find(idx as u32);
        let k = *root_class.entry(root).or_insert_with(|| {
            classes.push(PartitionClass {
                cylinders: Vec::new(),
                kind: ClassKind::Singleton,
            });
            (classes.len() - 1) as u32
        });
        class_of[idx] = k;
        classes[k as usize].cylinders.push(cylinder_at(rank, n, idx));
    }
    for (first, c) in hits {
        let k = class_of[first as usize] as usize;
        match &mut classes[k].kind {
            ClassKind::Parabolic { cosets } => cosets.push(c.clone()),
            kind @ ClassKind::Singleton => {
                *kind = ClassKind::Parabolic {
                    cosets: vec![c.clone()],
                }
            }
        }
    }
    for class in &mut classes {
        if let ClassKind::Parabolic { cosets } = &mut class.kind {
            cosets.sort();
        }
    }
    Ok(CylinderPartition {
        rank,
        depth: n,
        classes,
        class_of,
    })
}

/// Checks of the refinement map from the depth-`m` partition onto the
/// depth-`n` partition, `n ≤ m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse_depth: usize,
    pub fine_depth: usize,
    pub coarse_classes: usize,
    pub fine_classes: usize,
    /// `map[k]` is the coarse class receiving fine class `k`.
    pub map: Vec<usize>,
    pub well_defined: bool,
    pub surjective: bool,
    /// Every coarse class has at least two preimage classes.
    pub perfect: bool,
    /// Every depth-`m` separating translate that still spans several depth-`n`
    /// cylinders is one of the depth-`n` separating translates.
    pub upper_semicontinuous: bool,
}

impl RefinementReport {
    pub fn passed(&self) -> bool {
        self.well_defined && self.surjective && self.perfect && self.upper_semicontinuous
    }
}

/// Refinement map between the depth-`m` and depth-`n` partitions.
pub fn refinement_map(fine: &CylinderPartition, coarse: &CylinderPartition) -> (Vec<usize>, bool) {
    let mut well_defined = true;
    let map = fine
        .classes
        .iter()
        .map(|class| {
            let mut targets = class.cylinders.iter().map(|w| coarse.class_of_prefix(w));
            let first = targets.next().expect("classes are nonempty");
            if targets.any(|t| t != first) {
                well_defined = false;
            }
            first
        })
        .collect();
    (map, well_defined)
}

/// Builds both partitions and checks the refinement map `P_m → P_n`.
pub fn refine_and_check(
    collection: &SubgroupCollection,
    m: usize,
    n: usize,
    limits: &Limits,
) -> Result<RefinementReport> {
    if n > m {
        return Err(Error::InvalidArgument(format!(
            "refinement needs n ≤ m, got n = {n}, m = {m}"
        )));
    }
    let coarse = decomposition_partition(collection, n, limits)?;
    let fine = partition_unchecked(collection, m, limits)?;
    let (map, well_defined) = refinement_map(&fine, &coarse);

    let mut preimages = vec![0usize; coarse.class_count()];
    for &t in &map {
        preimages[t] += 1;
    }
    let surjective = preimages.iter().all(|&p| p > 0);
    let perfect = m > n && preimages.iter().all(|&p| p >= 2);

    let coarse_separating = separating_cosets(collection, n, limits)?;
    let upper_semicontinuous = separating_cosets(collection, m, limits)?.iter().all(|c| {
        let core = &collection.cores()[c.subgroup];
        translate_cylinders(core, &c.rep, n).len() < 2 || coarse_separating.binary_search(c).is_ok()
    });

    Ok(RefinementReport {
        coarse_depth: n,
        fine_depth: m,
        coarse_classes: coarse.class_count(),
        fine_classes: fine.class_count(),
        map,
        well_defined,
        surjective,
        perfect,
        upper_semicontinuous,
    })
}

/// `outer ∘ inner` for refinement maps given as class tables.
pub fn compose_maps(inner: &[usize], outer: &[usize]) -> Vec<usize> {
    inner.iter().map(|&k| outer[k]).collect()
}
