//! platefind-core — find a target license plate across recorded camera
//! frame sequences.
//!
//! The pipeline runs in five stages over each video:
//!
//! 1. **Selection** — visit every `floor(fps / 2)`-th frame and keep only
//!    frames showing a detection in a new place ([`selector`]).
//! 2. **Detection** — localize plate-shaped regions by horizontal edge
//!    density and widen each box by 20 px per side ([`detector`]).
//! 3. **Enhancement** — median denoise, contrast stretch, height
//!    normalization ([`enhancer`]).
//! 4. **Transformation** — a fixed 20-variant rotation/crop sweep so at
//!    least one sub-image is near horizontal ([`transformer`]).
//! 5. **Recognition** — Otsu binarization, component segmentation,
//!    template classification against an embedded glyph atlas, plus
//!    format-driven correction of cross-class look-alikes
//!    ([`recognizer`], [`plate_format`]).
//!
//! Detections persist as JSONL; [`matcher`] queries them for a target
//! plate under a mismatch-distance threshold and renders the
//! time/location report. [`synth`] generates seeded scenes with exact
//! ground truth, closing the loop for end-to-end verification.

pub mod detector;
pub mod enhancer;
pub mod error;
pub mod imaging;
pub mod matcher;
pub mod pipeline;
pub mod plate_format;
pub mod recognizer;
pub mod selector;
pub mod synth;
pub mod transformer;

pub use detector::{DetectorConfig, PlateCandidate, PlateDetector};
pub use enhancer::{DegradeSpec, Enhancer};
pub use error::{Error, Result};
pub use imaging::{BBox, GrayImage, RgbImage};
pub use matcher::{Detection, MatchResult};
pub use pipeline::{PipelineConfig, process};
pub use plate_format::{AnalogTable, PlateParse, PlateText};
pub use recognizer::{GlyphAtlas, RecognitionCandidate};
pub use selector::SelectedFrame;
pub use synth::{GroundTruth, SceneSpec, VideoManifest};
pub use transformer::TransformVariant;
