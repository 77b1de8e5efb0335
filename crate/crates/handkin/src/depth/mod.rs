//! Depth-image processing: raw frames to normalized rasters, raster-space
//! normalization stages, and online augmentation.

mod augment;
mod frame;
mod pipeline;
mod raster;

pub use augment::{augment, augment_with, draw_augment, AugmentDraws};
pub use frame::{CameraIntrinsics, DepthFrame};
pub use pipeline::{
    compute_com, extract_cube, preprocess_frame, render_points_to_image, PipelineConfig,
    ProcessedSample,
};
pub use raster::{
    avg_pool, crop_recenter_raster, median_filter_fg, rescale_raster, rotate_raster, Raster,
    BACKGROUND,
};
