//! Asymptotic-line geometry of deformed Clifford tori in the 3-sphere.
//!
//! The flat Clifford torus carries two families of closed asymptotic
//! lines, and a normal-graph deformation of size `eps` makes both
//! foliations drift: the return map through a full period moves every
//! section point by `-12 pi eps^2` to leading order. This crate computes
//! all of the pieces of that statement numerically and checks them
//! against each other:
//!
//! - [`vec4`]: inner products, 4x4 determinants and the triple wedge
//!   product defining normals in the 3-sphere;
//! - [`surface`]: closed-form 2-jets of the Clifford chart, its unit
//!   normal, and arbitrary normal-graph deformations;
//! - [`forms`]: fundamental forms, extrinsic curvature, closed-form
//!   second-form coefficients exact in `eps`, and hyperbolicity scans;
//! - [`flow`]: resolution of the implicit quadratic direction equation,
//!   adaptive integration of asymptotic lines with lift tracking,
//!   Poincaré return maps, translation numbers and Richardson extraction
//!   of the quadratic drift coefficient;
//! - [`variation`]: first and second variational equations of any
//!   quadratic coefficient family, evaluated by quadrature independently
//!   of the flow, with period defects `0` and `-24 pi`;
//! - [`export`]: stereographic projection and OBJ / CSV export of meshes
//!   and integrated lines;
//! - [`acceptance`]: the deterministic verification suite behind
//!   `asymptorus verify`.
//!
//! Both foliations stay globally defined for deformation sizes below
//! `1/16`; the hyperbolicity scan locates the first degeneracy on the
//! chart diagonal, where the discriminant equals `1 - 16 eps` exactly.

pub mod acceptance;
pub mod error;
pub mod export;
pub mod flow;
pub mod forms;
pub mod quadrature;
pub mod surface;
pub mod util;
pub mod variation;
pub mod vec4;

pub use error::{Error, Result};
pub use export::{
    asymptotic_polylines, export_lines, export_mesh, stereographic, torus_mesh, ProjectedMesh,
};
pub use flow::{
    branch_slope, integrate_line, poincare1, poincare2, quad_coeff_extract, translation_number,
    Branch, CoeffSource, CurveSample, IntegratorOptions, LiftedCurve, ReturnMapReport,
    TranslationEstimate,
};
pub use forms::{
    discriminant, first_form, form_pair, hyperbolicity_scan, k_ext, projective_gap, second_form,
    second_form_closed, FormPair, ScanReport,
};
pub use surface::{
    clifford_jet, clifford_normal, normal_jet, perturbed_jet, perturbed_jet_unguarded,
    perturbed_position, ChartPoint, Perturbation, SinSqDiagonal, SurfaceJet2, EPS_GUARD,
};
pub use variation::{
    asymptotic_family, cross_validate, first_variation, second_variation, CrossValidation,
    QuadraticFamily, SecondFormFamily, Swapped, VariationSettings, VariationTrace,
};
pub use vec4::{det4, wedge3, Vec4};
