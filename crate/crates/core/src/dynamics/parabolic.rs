use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::point::CylinderImage;
use crate::error::{Error, Result};
use crate::metric::{GroupSpec, Limits};
use crate::stallings::{CoreGraph, CosetRef, SubgroupCollection};
use crate::word::{ball_size, extensions, sphere_size, words_of_length, words_up_to, Word};

/// Finite evidence that the point `gΛ(H)` of the quotient is bounded
/// parabolic: a compact piece `E` of its complement whose translates under
/// the stabilizer `gHg⁻¹` cover everything else.
///
/// Frontier, `E` and the coverage search are computed for `H` itself; left
/// multiplication by `translated_by` carries them to the coset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicCertificate {
    pub coset: CosetRef,
    pub translated_by: Word,
    pub generating_set: String,
    #[serde(rename = "R")]
    pub r: usize,
    pub lambda: usize,
    pub delta: usize,
    /// `2R + 100δ`.
    pub frontier_ball: usize,
    pub depth: usize,
    /// Points at distance exactly `R` from `H` inside the frontier ball.
    pub frontier: Vec<Word>,
    /// Depth-`d` cylinders whose geodesic from 1 crosses the frontier.
    #[serde(rename = "E")]
    pub e: Vec<Word>,
    pub e_avoids_limit_set: bool,
    /// Stabilizer elements up to this length were tried for each cylinder.
    pub coverage_radius: usize,
    pub covered: bool,
    /// Cylinders off `Λ(H)` that no tried element moves into `E`.
    pub uncovered: Vec<Word>,
}

/// Whether a cylinder image lies inside the union of the depth-`d` cylinders
/// in `e`.
fn image_inside(img: &CylinderImage, e: &HashSet<Word>, rank: usize, d: usize) -> bool {
    match img {
        CylinderImage::Cylinder(x) if x.len() >= d => e.contains(&x.prefix(d)),
        CylinderImage::Cylinder(x) => {
            let mut frontier = vec![x.clone()];
            for _ in x.len()..d {
                frontier = frontier.iter().flat_map(|w| extensions(rank, w)).collect();
            }
            frontier.iter().all(|w| e.contains(w))
        }
        CylinderImage::Complement(y) => {
            // every depth-d cylinder outside [y] must be in E
            let under = if y.len() <= d {
                (2 * rank as u128 - 1).pow((d - y.len()) as u32)
            } else {
                0
            };
            (e.len() as u128) + under >= sphere_size(rank, d)
                && words_of_length(rank, d)
                    .filter(|w| !y.is_prefix_of(w))
                    .all(|w| e.contains(&w))
        }
    }
}

fn frontier_and_e(core: &CoreGraph, r: usize, ball: usize, depth: usize) -> (Vec<Word>, Vec<Word>) {
    let rank = core.rank();
    let frontier: Vec<Word> = words_up_to(rank, ball)
        .filter(|z| core.coset_distance(z, &Word::identity()) == r)
        .collect();
    let fset: HashSet<&Word> = frontier.iter().collect();
    let e = words_of_length(rank, depth)
        .filter(|w| (0..=w.len()).any(|k| fset.contains(&w.prefix(k))))
        .collect();
    (frontier, e)
}

/// Builds `E` from the `R`-frontier of the coset and checks that stabilizer
/// translates of `E` cover every depth-`d` cylinder off the limit set.
pub fn parabolic_certificate(
    collection: &SubgroupCollection,
    coset: &CosetRef,
    r: usize,
    depth: usize,
    limits: &Limits,
) -> Result<ParabolicCertificate> {
    let core = collection.core(coset.subgroup)?;
    if !core.is_proper() {
        return Err(Error::NotProper);
    }
    let rank = collection.rank();
    let delta = GroupSpec::free(rank)?.delta_ceil();
    let lambda = core.quasiconvexity_constant();
    let bound = 2 * lambda + 10 * delta;
    if r <= bound {
        return Err(Error::BadR { r, bound });
    }
    let frontier_ball = 2 * r + 100 * delta;
    if depth < frontier_ball {
        return Err(Error::DepthTooShallow {
            depth,
            needed: frontier_ball,
        });
    }
    limits.check("ball vertices", ball_size(rank, depth), limits.max_ball_vertices)?;

    let (frontier, e) = frontier_and_e(core, r, frontier_ball, depth);
    let e_avoids_limit_set = e.iter().all(|w| !core.limit_prefix_extends(w));
    let eset: HashSet<Word> = e.iter().cloned().collect();

    let coverage_radius = depth + r;
    let stabilizer = core.elements_up_to(coverage_radius);
    let uncovered: Vec<Word> = words_of_length(rank, depth)
        .filter(|w| !core.limit_prefix_extends(w))
        .filter(|w| {
            !stabilizer
                .iter()
                .any(|p| image_inside(&CylinderImage::of(p, w), &eset, rank, depth))
        })
        .collect();

    Ok(ParabolicCertificate {
        coset: coset.clone(),
        translated_by: coset.rep.clone(),
        generating_set: crate::GENERATING_SET.to_string(),
        r,
        lambda,
        delta,
        frontier_ball,
        depth,
        frontier,
        e,
        e_avoids_limit_set,
        coverage_radius,
        covered: uncovered.is_empty(),
        uncovered,
    })
}
