use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::point::RationalBoundaryPoint;
use crate::error::{Error, Result};
use crate::malnormal::bci_report;
use crate::metric::{GroupSpec, Limits};
use crate::stallings::{CosetRef, SubgroupCollection};
use crate::word::{words_up_to, Letter, Word};

/// The translate `gΛ(H_i)` containing `x`, if any. Exact: `u·v^∞` lies in a
/// translate iff `v^∞` can be read forever from some vertex of a core graph.
pub fn containing_translate(x: &RationalBoundaryPoint, collection: &SubgroupCollection) -> Option<CosetRef> {
    collection.cores().iter().enumerate().find_map(|(i, core)| {
        let q = core.periodic_vertex(x.period())?;
        let g = x.head().multiply(&core.path_to_base(q));
        Some(CosetRef {
            subgroup: i,
            rep: core.coset_min_rep(&g),
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexChoice {
    /// `n_i = n_{i−1} + 1` (or 0) already works.
    Greedy,
    /// `n_i = s − χ/2` for the offending coset.
    ProofChoice,
    /// Neither worked; first valid index found by scanning forward.
    Scan,
}

/// Where `γ(n_i)⁻¹` sends `x` and a test point `y` along indices in one
/// residue class modulo the period. For a periodic ray both sequences are
/// eventually constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicalLimits {
    pub indices: Vec<usize>,
    pub test_point: RationalBoundaryPoint,
    /// The common value of `γ(n_i)⁻¹·x`.
    pub a: RationalBoundaryPoint,
    /// The limit of `γ(n_i)⁻¹·y`.
    pub b: RationalBoundaryPoint,
    /// Length to which each `γ(n_i)⁻¹·y` agrees with `b`.
    pub agreement: Vec<usize>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicalCertificate {
    pub point: RationalBoundaryPoint,
    pub generating_set: String,
    #[serde(rename = "C")]
    pub c: usize,
    pub chi: usize,
    pub d_emp: usize,
    /// Neighborhood radius `C + λ + 2δ` at which `D_emp` was measured.
    pub bci_radius: usize,
    pub bci_ball_radius: usize,
    pub ns: Vec<usize>,
    pub choices: Vec<IndexChoice>,
    /// Largest `diam(N_C(gH) ∩ γ([n_i, checked_depth]))` over cosets near `γ(n_i)`.
    pub max_diameters: Vec<usize>,
    pub checked_depth: usize,
    /// Some offending coset was not cleared by `s − χ/2`.
    pub larger_inflation_needed: bool,
    pub limits: Option<ConicalLimits>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConicalOptions {
    /// Ball radius for the `D_emp` measurement; defaults to `2R + 2λ + 4`.
    pub bci_ball_radius: Option<usize>,
}

struct Ray<'a> {
    points: Vec<Word>,
    collection: &'a SubgroupCollection,
    offsets: Vec<Word>,
    c: usize,
}

impl Ray<'_> {
    fn depth(&self) -> usize {
        self.points.len() - 1
    }

    /// For each coset within `C` of `γ(n)`, the last `t ≤ depth` with
    /// `γ(t) ∈ N_C(gH)`.
    fn near_cosets(&self, n: usize) -> BTreeMap<CosetRef, usize> {
        let mut cosets = BTreeSet::new();
        for u in &self.offsets {
            let z = self.points[n].multiply(u);
            for (j, core) in self.collection.cores().iter().enumerate() {
                cosets.insert(CosetRef {
                    subgroup: j,
                    rep: core.coset_min_rep(&z),
                });
            }
        }
        cosets
            .into_iter()
            .map(|cr| {
                let core = &self.collection.cores()[cr.subgroup];
                let last = (n..=self.depth())
                    .rev()
                    .find(|&t| core.coset_distance(&self.points[t], &cr.rep) <= self.c)
                    .expect("γ(n) is within C of the coset");
                (cr, last)
            })
            .collect()
    }

    /// Largest diameter at `n`, and the offending `s` when it reaches `chi`.
    fn check(&self, n: usize, chi: usize) -> (usize, Option<usize>) {
        let near = self.near_cosets(n);
        let max = near.values().map(|&s| s - n).max().unwrap_or(0);
        let offending = near.values().copied().find(|&s| s - n >= chi);
        (max, offending)
    }
}

/// Certifies that `x` is a conical limit point: places `n_1 < … < n_{i_max}`
/// along its ray so that every coset `C`-close to `γ(n_i)` meets
/// `γ([n_i, checked_depth])` in a set of diameter below `χ`.
pub fn conical_certificate(
    x: &RationalBoundaryPoint,
    collection: &SubgroupCollection,
    i_max: usize,
    checked_depth: usize,
    options: ConicalOptions,
    limits: &Limits,
) -> Result<ConicalCertificate> {
    let rank = collection.rank();
    if x.min_rank() > rank {
        return Err(Error::InvalidArgument(format!(
            "{x} uses letters beyond rank {rank}"
        )));
    }
    if let Some(cr) = containing_translate(x, collection) {
        return Err(Error::NotConicalCandidate {
            subgroup: cr.subgroup,
            rep: cr.rep,
        });
    }
    let delta = GroupSpec::free(rank)?.delta_ceil();
    let lambda = collection.lambda_max();
    let c = lambda + 6 * delta;
    let bci_radius = c + lambda + 2 * delta;
    let (d_emp, bci_ball_radius) = if collection.is_empty() {
        (1, 0)
    } else {
        let n = options.bci_ball_radius.unwrap_or(2 * bci_radius + 2 * lambda + 4);
        (bci_report(collection, bci_radius, n, limits)?.d_emp, n)
    };
    let chi = 2 * d_emp;

    let ray = Ray {
        points: (0..=checked_depth).map(|t| x.prefix(t)).collect(),
        collection,
        offsets: words_up_to(rank, c).collect(),
        c,
    };
    let mut ns = Vec::with_capacity(i_max);
    let mut choices = Vec::with_capacity(i_max);
    let mut max_diameters = Vec::with_capacity(i_max);
    let mut larger_inflation_needed = false;
    let mut start = 0;
    while ns.len() < i_max {
        if start > checked_depth {
            return Err(Error::Horizon {
                checked_depth,
                wanted: i_max,
                placed: ns.len(),
            });
        }
        let (diam, offending) = ray.check(start, chi);
        let (n, choice, diam) = match offending {
            None => (start, IndexChoice::Greedy, diam),
            Some(s) => {
                let cand = s - chi / 2;
                match ray.check(cand, chi) {
                    (d, None) => (cand, IndexChoice::ProofChoice, d),
                    _ => {
                        larger_inflation_needed = true;
                        // γ(checked_depth) is always admissible
                        let (n, d) = (start + 1..=checked_depth)
                            .map(|t| (t, ray.check(t, chi)))
                            .find(|(_, (_, off))| off.is_none())
                            .map(|(t, (d, _))| (t, d))
                            .expect("the last index is admissible");
                        (n, IndexChoice::Scan, d)
                    }
                }
            }
        };
        ns.push(n);
        choices.push(choice);
        max_diameters.push(diam);
        start = n + 1;
    }

    Ok(ConicalCertificate {
        point: x.clone(),
        generating_set: crate::GENERATING_SET.to_string(),
        c,
        chi,
        d_emp,
        bci_radius,
        bci_ball_radius,
        limits: conical_limits(x, &ns, rank),
        ns,
        choices,
        max_diameters,
        checked_depth,
        larger_inflation_needed,
    })
}

fn conical_limits(x: &RationalBoundaryPoint, ns: &[usize], rank: usize) -> Option<ConicalLimits> {
    let (h, p) = (x.head().len(), x.period().len());
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &n in ns.iter().filter(|&&n| n >= h) {
        classes.entry((n - h) % p).or_default().push(n);
    }
    let (&residue, indices) = classes
        .iter()
        .max_by_key(|(r, v)| (v.len(), std::cmp::Reverse(**r)))?;

    let first = x.prefix(1).first()?;
    let other = Letter::alphabet(rank).find(|&l| l != first)?;
    let y = RationalBoundaryPoint::attracting(&Word::letter(other)).ok()?;
    let k = x.gromov_product(&y)?;

    let v = x.period();
    let b = RationalBoundaryPoint::new(&v.prefix(residue).inverse(), &v.inverse()).ok()?;
    let a = x.shift(indices[0]);
    let mut consistent = true;
    let mut agreement = Vec::with_capacity(indices.len());
    for &n in indices {
        consistent &= x.shift(n) == a;
        let moved = y.act(&x.prefix(n).inverse());
        let want = n.saturating_sub(k.max(h));
        let agree = moved.prefix(n + 1).common_prefix_len(&b.prefix(n + 1));
        consistent &= agree >= want;
        agreement.push(agree);
    }
    Some(ConicalLimits {
        indices: indices.clone(),
        test_point: y,
        a,
        b,
        agreement,
        consistent,
    })
}
