//! Finite-depth computations for boundaries of free groups relative to an
//! almost malnormal collection of quasiconvex subgroups.
//!
//! The free group `F_r` (rank `r ≥ 2`) acts on its Cayley tree, whose boundary
//! `∂G` is the Cantor set of infinite reduced words. Collapsing every
//! translate `gΛ(H)` of the limit sets of the subgroups to a point gives a
//! compact space `M` on which `F_r` acts as a geometrically finite convergence
//! group. This crate works with the pieces of that picture that are decidable
//! or finitely checkable:
//!
//! * [`word`], [`metric`]: word arithmetic, balls, Gromov products, four-point `δ`;
//! * [`stallings`]: folded core graphs, membership, coset representatives, `λ`;
//! * [`malnormal`]: exact malnormality decision and coset-intersection diameters;
//! * [`quotient`]: cylinder partitions approximating `M` and their refinements;
//! * [`dynamics`]: rational boundary points and certificates for collapsing
//!   sequences, bounded parabolic points and conical limit points.

pub mod dynamics;
pub mod error;
pub mod malnormal;
pub mod metric;
pub mod quotient;
pub mod stallings;
pub mod word;

pub use dynamics::{
    act_on_point, classify_point, collapsing_check, conical_certificate, parabolic_certificate,
    CollapseReport, CollapseSequence, ConicalCertificate, ParabolicCertificate, PointClass,
    RationalBoundaryPoint,
};
pub use error::{Error, Result};
pub use malnormal::{
    bci_report, coset_intersection_diameter, is_almost_malnormal, BciReport, Diameter,
    MalnormalityCertificate,
};
pub use metric::{build_ball, four_point_delta, DeltaEstimate, GroupSpec, Limits, MetricBallGraph};
pub use quotient::{decomposition_partition, refine_and_check, CylinderPartition, RefinementReport};
pub use stallings::{CoreGraph, CosetRef, SubgroupCollection};
pub use word::{gromov_product, reduce, Letter, Word};

/// Generating set used for every word length and distance.
pub const GENERATING_SET: &str = "free basis";
