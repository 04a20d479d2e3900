//! Image-coded representation of FPGA configuration bitstreams.
//!
//! The pipeline runs profile -> frames -> CLB/slice bytes -> pixel blocks ->
//! device image, with ground-truth boxes derived from placement rectangles
//! and detections scored by IoU-thresholded AP/mAP.

pub mod annotation;
pub mod bitstream;
pub mod dataset;
pub mod device;
pub mod image;
pub mod metrics;
pub mod rng;

pub use annotation::{placement_to_bbox, AnnotationFormat, BBox, BBoxAnnotation, PlacementRecord};
pub use bitstream::{
    extract_clb_bytes, extract_slice_bytes, parse_container, synthesize_container, ContainerFormat,
    FrameArray, SlicePos,
};
pub use dataset::{build_dataset, synth_dataset, ClassSignature, DatasetManifest};
pub use device::{load_profile, synthetic_profile, DeviceProfile, FamilyParams, SliceKind};
pub use image::{compression_ratio, encode_image, encode_slice, EncodedImage, PixelOrder};
pub use metrics::{average_precision, evaluate, iou, Detection, EvalReport};
