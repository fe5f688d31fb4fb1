//! Edge-aware processing in bilateral space: the solver, segmentation mask
//! refinement, mask/disparity fusion and disparity smoothing.

mod fusion;
mod jbu;
mod mask;
mod median;
mod smooth;
mod solver;

pub use fusion::{face_disparity, fuse_mask_disparity, FaceRect, Fusion, FusionParams};
pub use jbu::{joint_bilateral_upsample, JbuParams};
pub use mask::{erosion_size, mask_confidence, mask_sigmoid, refine_mask, MaskParams};
pub use median::median3x3;
pub use smooth::smooth_disparity;
pub use solver::{
    bilateral_solve, guide_features, BilateralGrid, BilateralParams, BilateralSolver, SolveReport,
};
