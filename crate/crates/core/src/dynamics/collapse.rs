use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::point::{CylinderImage, RationalBoundaryPoint};
use crate::error::{Error, Result};
use crate::quotient::CylinderPartition;
use crate::word::{words_of_length, Word};

/// The sequence `g_i = s·t^i`, `i ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseSequence {
    pub s: Word,
    pub t: Word,
}

impl CollapseSequence {
    pub fn new(s: Word, t: Word) -> Result<CollapseSequence> {
        if t.is_identity() || !t.is_cyclically_reduced() {
            return Err(Error::InvalidArgument(format!(
                "t = {t} must be nonempty and cyclically reduced"
            )));
        }
        Ok(CollapseSequence { s, t })
    }

    pub fn element(&self, i: usize) -> Word {
        self.s.multiply(&self.t.pow(i as i64))
    }

    /// `s·t^∞`, the limit of `g_i·x` for every `x ≠ t^{−∞}`.
    pub fn attractor(&self) -> RationalBoundaryPoint {
        RationalBoundaryPoint::attracting(&self.t)
            .expect("t is nontrivial")
            .act(&self.s)
    }

    /// `t^{−∞}`.
    pub fn repeller(&self) -> RationalBoundaryPoint {
        RationalBoundaryPoint::repelling(&self.t).expect("t is nontrivial")
    }
}

/// Outcome of the same check on cylinder sets saturated by a partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientCollapse {
    /// Attractor and repeller cylinders fall in one class.
    pub same_class: bool,
    /// `None` when saturation pulls the repeller class into `K` or the
    /// attractor class into `L`.
    pub violation_indices: Option<BTreeSet<usize>>,
    pub stable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub sequence: CollapseSequence,
    pub depth: usize,
    pub i_max: usize,
    pub attractor: RationalBoundaryPoint,
    pub repeller: RationalBoundaryPoint,
    #[serde(rename = "K")]
    pub k: Vec<Word>,
    #[serde(rename = "L")]
    pub l: Vec<Word>,
    pub violation_indices: BTreeSet<usize>,
    /// The violation set is unchanged when `i_max` is doubled.
    pub stable: bool,
    pub quotient: Option<QuotientCollapse>,
}

/// Depth-`d` cylinders outside `[first letter of x]`.
pub fn cylinders_avoiding(rank: usize, depth: usize, x: &RationalBoundaryPoint) -> Vec<Word> {
    let first = x.prefix(1);
    words_of_length(rank, depth)
        .filter(|w| !first.is_prefix_of(w))
        .collect()
}

/// Indices `i ≤ i_max` with `g_i·K ∩ L ≠ ∅`, computed on exact cylinder images.
fn violations(seq: &CollapseSequence, k: &[Word], l: &[Word], i_max: usize) -> BTreeSet<usize> {
    let mut g = seq.s.clone();
    let mut out = BTreeSet::new();
    for i in 0..=i_max {
        let hit = k.iter().any(|kw| {
            let img = CylinderImage::of(&g, kw);
            l.iter().any(|lw| img.meets(lw))
        });
        if hit {
            out.insert(i);
        }
        g = g.multiply(&seq.t);
    }
    out
}

fn saturate(partition: &CylinderPartition, set: &[Word]) -> Vec<Word> {
    let classes: BTreeSet<usize> = set.iter().map(|w| partition.class_of(w)).collect();
    let mut out: Vec<Word> = classes
        .into_iter()
        .flat_map(|c| partition.classes[c].cylinders.iter().cloned())
        .collect();
    out.sort();
    out
}

/// Checks that `g_i = s·t^i` collapses: for `K` away from the repeller and
/// `L` away from the attractor, `g_i·K ∩ L` is empty for all but finitely many
/// `i`. With a partition of the same depth, the check is repeated on the
/// class saturations of `K` and `L`.
pub fn collapsing_check(
    seq: &CollapseSequence,
    k: &[Word],
    l: &[Word],
    depth: usize,
    i_max: usize,
    partition: Option<&CylinderPartition>,
) -> Result<CollapseReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be positive".into()));
    }
    for (name, set) in [("K", k), ("L", l)] {
        if set.is_empty() {
            return Err(Error::InvalidArgument(format!("{name} is empty")));
        }
        if let Some(w) = set.iter().find(|w| w.len() != depth) {
            return Err(Error::InvalidArgument(format!(
                "{name} cylinder {w} does not have depth {depth}"
            )));
        }
    }
    let attractor = seq.attractor();
    let repeller = seq.repeller();
    let (a_cyl, r_cyl) = (attractor.prefix(depth), repeller.prefix(depth));
    if k.contains(&r_cyl) {
        return Err(Error::BadCompacts(format!(
            "K contains the repeller cylinder [{r_cyl}]"
        )));
    }
    if l.contains(&a_cyl) {
        return Err(Error::BadCompacts(format!(
            "L contains the attractor cylinder [{a_cyl}]"
        )));
    }

    let violation_indices = violations(seq, k, l, i_max);
    let stable = violations(seq, k, l, 2 * i_max) == violation_indices;

    let quotient = partition
        .map(|p| -> Result<QuotientCollapse> {
            if p.depth != depth {
                return Err(Error::InvalidArgument(format!(
                    "partition depth {} differs from {depth}",
                    p.depth
                )));
            }
            let same_class = p.class_of(&a_cyl) == p.class_of(&r_cyl);
            let (ks, ls) = (saturate(p, k), saturate(p, l));
            if ks.contains(&r_cyl) || ls.contains(&a_cyl) {
                return Ok(QuotientCollapse {
                    same_class,
                    violation_indices: None,
                    stable: None,
                });
            }
            let v = violations(seq, &ks, &ls, i_max);
            let stable = violations(seq, &ks, &ls, 2 * i_max) == v;
            Ok(QuotientCollapse {
                same_class,
                violation_indices: Some(v),
                stable: Some(stable),
            })
        })
        .transpose()?;

    Ok(CollapseReport {
        sequence: seq.clone(),
        depth,
        i_max,
        attractor,
        repeller,
        k: k.to_vec(),
        l: l.to_vec(),
        violation_indices,
        stable,
        quotient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Limits;
    use crate::quotient::decomposition_partition;
    use crate::stallings::SubgroupCollection;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn powers_of_a() {
        let seq = CollapseSequence::new(w("1"), w("a")).unwrap();
        assert_eq!(seq.attractor().to_string(), "(a)");
        assert_eq!(seq.repeller().to_string(), "(A)");
        let k = cylinders_avoiding(2, 3, &seq.repeller());
        let l = cylinders_avoiding(2, 3, &seq.attractor());
        let r = collapsing_check(&seq, &k, &l, 3, 32, None).unwrap();
        assert_eq!(r.violation_indices, BTreeSet::from([0]));
        assert!(r.stable);
    }

    #[test]
    fn bad_compacts() {
        let seq = CollapseSequence::new(w("1"), w("a")).unwrap();
        let all: Vec<Word> = words_of_length(2, 3).collect();
        let l = cylinders_avoiding(2, 3, &seq.attractor());
        let err = collapsing_check(&seq, &all, &l, 3, 32, None).unwrap_err();
        assert_eq!(err.code(), "BAD_COMPACTS");
        let k = cylinders_avoiding(2, 3, &seq.repeller());
        let err = collapsing_check(&seq, &k, &all, 3, 32, None).unwrap_err();
        assert_eq!(err.code(), "BAD_COMPACTS");
        assert!(CollapseSequence::new(w("1"), w("abA")).is_err());
    }

    #[test]
    fn small_compacts_violate_finitely_often() {
        let seq = CollapseSequence::new(w("b"), w("ba")).unwrap();
        let k = vec![w("bab"), w("BBB"), w("aab")];
        let l = vec![w("Bab"), w("aBa"), w("ABA")];
        let r = collapsing_check(&seq, &k, &l, 3, 16, None).unwrap();
        assert!(r.stable);
        assert!(
            r.violation_indices.iter().all(|&i| i <= 3),
            "{:?}",
            r.violation_indices
        );
    }

    #[test]
    fn quotient_level_same_class() {
        let c = SubgroupCollection::from_generators(2, &[&["a"]]).unwrap();
        let p = decomposition_partition(&c, 3, &Limits::default()).unwrap();
        let seq = CollapseSequence::new(w("1"), w("a")).unwrap();
        let k = vec![w("bab")];
        let l = vec![w("Bab")];
        let r = collapsing_check(&seq, &k, &l, 3, 16, Some(&p)).unwrap();
        let q = r.quotient.unwrap();
        assert!(q.same_class);
        assert!(q.violation_indices.is_some());

        let seq = CollapseSequence::new(w("1"), w("ab")).unwrap();
        let k = cylinders_avoiding(2, 3, &seq.repeller());
        let l = cylinders_avoiding(2, 3, &seq.attractor());
        let r = collapsing_check(&seq, &k, &l, 3, 16, Some(&p)).unwrap();
        assert!(!r.quotient.unwrap().same_class);
    }
}
