//! Every numerical tolerance and budget used by the library, with defaults.
//!
//! Experiment configs override individual fields; anything not overridden
//! keeps the default below.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSettings {
    /// Newton budget for the Gauss map and conjugate ascent.
    pub newton_budget: usize,
    pub newton_tol: f64,
    /// Central-difference step for gradients, scaled by `max(1, |x|)`.
    pub fd_grad_step: f64,
    /// Central-difference step for Hessians, scaled by `max(1, |x|)`.
    pub fd_hess_step: f64,
    /// Directions sampled when estimating the ellipticity constant.
    pub gamma_samples: usize,
    /// Directions in the dense seed set for conjugate ascent.
    pub ascent_seeds: usize,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self {
            newton_budget: 50,
            newton_tol: 1e-10,
            fd_grad_step: 1e-6,
            fd_hess_step: 1e-4,
            gamma_samples: 10_000,
            ascent_seeds: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeSettings {
    /// Half-width of the boundary band used by membership tests.
    pub boundary_tol: f64,
    /// Minimal φ*-gap required between components of a disjoint union.
    pub disjoint_margin: f64,
    /// Gauss–Legendre nodes per fiber arc (and per side of fiber patches).
    pub fiber_nodes: usize,
}

impl Default for ShapeSettings {
    fn default() -> Self {
        Self {
            boundary_tol: 1e-9,
            disjoint_margin: 1e-6,
            fiber_nodes: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionSettings {
    /// Number of local-descent starts per boundary cell.
    pub k_seed: usize,
    /// Coarse directions scanned per smooth cell to pick seeds (per unit of
    /// intrinsic dimension; 3D cells use the square).
    pub seed_grid: usize,
    /// Two feet further apart than `tol_multi * diameter` are distinct.
    pub tol_multi: f64,
    /// Two minima within `tol_eq * (1 + δ)` are ties.
    pub tol_eq: f64,
    /// Residual above which a projection is reported unconverged.
    pub max_residual: f64,
    pub newton_budget: usize,
    /// Relative predicate tolerance for `δ(a + sη) = s`.
    pub tol_pred: f64,
    /// `s_max = s_max_factor * diameter(bounding box)`.
    pub s_max_factor: f64,
    /// Smallest probed `s` is `s_min_factor * s_max`.
    pub s_min_factor: f64,
    /// Bisection stops at bracket width `bracket_tol * s_max`.
    pub bracket_tol: f64,
    /// Random points in the Unp cross-validation scan.
    pub unp_scan_points: usize,
    /// The scan covers `δ < global * (1 - unp_margin)`.
    pub unp_margin: f64,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        Self {
            k_seed: 8,
            seed_grid: 64,
            tol_multi: 1e-4,
            tol_eq: 1e-7,
            max_residual: 1e-7,
            newton_budget: 60,
            tol_pred: 1e-8,
            s_max_factor: 10.0,
            s_min_factor: 1e-7,
            bracket_tol: 1e-10,
            unp_scan_points: 10_000,
            unp_margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureSettings {
    /// Probe offset is `min(r_frac * reach, r_cap * diameter)`.
    pub r_frac: f64,
    pub r_cap: f64,
    /// Tangent finite-difference step as a fraction of the probe offset.
    pub fd_step_frac: f64,
    /// `1 - rχ <= tol_inf` marks an infinite curvature.
    pub tol_inf: f64,
    /// Relative tolerance of the probe-r versus probe-2r audit.
    pub tol_kinv: f64,
    /// Boundary step for the pointwise (graph) curvature route, relative to
    /// the bounding-box diameter.
    pub pointwise_step: f64,
}

impl Default for CurvatureSettings {
    fn default() -> Self {
        Self {
            r_frac: 0.1,
            r_cap: 0.05,
            fd_step_frac: 1e-4,
            tol_inf: 1e-6,
            tol_kinv: 1e-4,
            pointwise_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoxelSampling {
    /// One sample at each voxel center.
    Center,
    /// One uniformly jittered sample per voxel (stratified Monte Carlo).
    Jittered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSettings {
    /// Voxel size `h = diameter / voxel_div_2d` in the plane.
    pub voxel_div_2d: usize,
    pub voxel_div_3d: usize,
    pub voxel_cap: usize,
    pub voxel_sampling: VoxelSampling,
    /// Relative tolerance when splitting `{r > ρ}` from `{r >= ρ}`.
    pub reach_tie: f64,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        Self {
            voxel_div_2d: 512,
            voxel_div_3d: 128,
            voxel_cap: 30_000_000,
            voxel_sampling: VoxelSampling::Jittered,
            reach_tie: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremSettings {
    /// Relative spread allowed when testing constancy of `H_r`.
    pub tol_const: f64,
    /// Relative agreement of the two radius formulas.
    pub tol_rad: f64,
    /// Fit residual as a fraction of the radius.
    pub tol_fit: f64,
    /// Singular-set budget as a fraction of the total bundle weight.
    pub tol_sing: f64,
    /// Relative tolerance of integral identities (Minkowski, volume).
    pub tol_identity: f64,
    /// Heintze–Karcher equality band as a fraction of the volume.
    pub tol_equality: f64,
    /// Absolute slack allowed on sign conditions.
    pub tol_sign: f64,
    /// Single-linkage radius as a multiple of the mean sample spacing.
    pub link_factor: f64,
}

impl Default for TheoremSettings {
    fn default() -> Self {
        Self {
            tol_const: 1e-3,
            tol_rad: 1e-2,
            tol_fit: 1e-3,
            tol_sing: 1e-3,
            tol_identity: 5e-3,
            tol_equality: 5e-3,
            tol_sign: 1e-6,
            link_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub norm: NormSettings,
    pub shape: ShapeSettings,
    pub projection: ProjectionSettings,
    pub curvature: CurvatureSettings,
    pub measures: MeasureSettings,
    pub theorems: TheoremSettings,
    pub execution: Execution,
}
