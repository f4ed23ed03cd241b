//! Group dynamics on rational boundary points and finite certificates for
//! collapsing sequences, conical limit points and bounded parabolic points.

mod collapse;
mod conical;
mod parabolic;
mod point;

pub use collapse::{
    collapsing_check, cylinders_avoiding, CollapseReport, CollapseSequence, QuotientCollapse,
};
pub use conical::{
    conical_certificate, containing_translate, ConicalCertificate, ConicalLimits, ConicalOptions, IndexChoice,
};
pub use parabolic::{parabolic_certificate, ParabolicCertificate};
pub use point::{act_on_point, CylinderImage, RationalBoundaryPoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{GroupSpec, Limits};
use crate::stallings::{CosetRef, SubgroupCollection};

/// A rational point is either conical or the image of a parabolic point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PointClass {
    Conical {
        certificate: Box<ConicalCertificate>,
    },
    Parabolic {
        coset: CosetRef,
        certificate: Box<ParabolicCertificate>,
    },
}

impl PointClass {
    /// The certificate inside carries a positive verdict.
    pub fn certified(&self) -> bool {
        match self {
            PointClass::Conical { certificate } => certificate.ns.windows(2).all(|w| w[0] < w[1]),
            PointClass::Parabolic { certificate, .. } => certificate.covered,
        }
    }
}

/// Tries a conical certificate; on `NOT_CONICAL_CANDIDATE` builds a parabolic
/// certificate for the containing coset with the smallest admissible `R` and
/// depth `2R + 100δ + 2`.
pub fn classify_point(
    x: &RationalBoundaryPoint,
    collection: &SubgroupCollection,
    i_max: usize,
    checked_depth: usize,
    limits: &Limits,
) -> Result<PointClass> {
    match conical_certificate(
        x,
        collection,
        i_max,
        checked_depth,
        ConicalOptions::default(),
        limits,
    ) {
        Ok(certificate) => Ok(PointClass::Conical {
            certificate: Box::new(certificate),
        }),
        Err(Error::NotConicalCandidate { subgroup, rep }) => {
            let coset = CosetRef { subgroup, rep };
            let delta = GroupSpec::free(collection.rank())?.delta_ceil();
            let lambda = collection.core(subgroup)?.quasiconvexity_constant();
            let r = 2 * lambda + 10 * delta + 1;
            let depth = 2 * r + 100 * delta + 2;
            let certificate = parabolic_certificate(collection, &coset, r, depth, limits)?;
            Ok(PointClass::Parabolic {
                coset,
                certificate: Box::new(certificate),
            })
        }
        Err(e) => Err(e),
    }
}
