//! Stride-based frame selection with stationary-vehicle deduplication.
//!
//! Running the detector on every frame wastes most of the work: a vehicle
//! entering the field of view stays there for at least half a second, so
//! visiting every `floor(fps / 2)`-th frame is guaranteed to catch it at
//! least once. Of the visited frames, only those that show a detection in
//! a *new* place are emitted — a parked vehicle yields exactly one frame no
//! matter how long it sits.

use crate::detector::{PlateCandidate, PlateDetector};
use crate::error::{Error, Result};
use crate::imaging::{BBox, GrayImage};

/// Walking state of one pass over a video.
#[derive(Debug, Clone)]
pub struct FrameCursor {
    /// Next frame index to visit (0-based).
    pub f_no: usize,
    /// Best detection box seen on the previous visited frame, if any.
    pub prev_loc: Option<BBox>,
    /// Frames per second of the source video (>= 2).
    pub fps: u32,
}

/// A visited frame that carried at least one detection worth keeping.
#[derive(Debug, Clone)]
pub struct SelectedFrame {
    pub frame_index: usize,
    /// Candidates from the detector, best first; never empty.
    pub candidates: Vec<PlateCandidate>,
    /// Seconds from video start: `frame_index / fps`.
    pub timestamp_s: f64,
}

/// Sampling stride for a frame rate: `floor(fps / 2)`. Any presence
/// interval of at least `stride + 1` frames contains a visited index.
pub fn stride_for(fps: u32) -> Result<usize> {
    if fps < 2 {
        return Err(Error::BadFps(fps));
    }
    Ok((fps / 2) as usize)
}

/// True when two consecutive detections overlap enough to be the same
/// vehicle at rest: `IoU >= iou_min`.
pub fn is_stationary(loc: &BBox, prev_loc: &BBox, iou_min: f64) -> bool {
    debug_assert!(iou_min > 0.0 && iou_min <= 1.0);
    loc.iou(prev_loc) >= iou_min
}

/// Walks frames 0, s, 2s, ... with `s = stride_for(fps)`, running the
/// detector only on visited frames. A visited frame is emitted when it has
/// detections and its best box is not stationary relative to the previous
/// one; the first detection after any gap is always emitted. The tracked
/// box resets whenever a visited frame comes back empty.
pub fn select_frames(
    frames: &[GrayImage],
    fps: u32,
    detector: &dyn PlateDetector,
    iou_min: f64,
) -> Result<Vec<SelectedFrame>> {
    let stride = stride_for(fps)?;
    let mut cursor = FrameCursor {
        f_no: 0,
        prev_loc: None,
        fps,
    };
    let mut selected = Vec::new();
    while cursor.f_no < frames.len() {
        let candidates = detector.detect(&frames[cursor.f_no]);
        match candidates.first() {
            None => cursor.prev_loc = None,
            Some(best) => {
                let stationary = cursor
                    .prev_loc
                    .as_ref()
                    .is_some_and(|prev| is_stationary(&best.bbox, prev, iou_min));
                if !stationary {
                    selected.push(SelectedFrame {
                        frame_index: cursor.f_no,
                        candidates: candidates.clone(),
                        timestamp_s: cursor.f_no as f64 / fps as f64,
                    });
                }
                cursor.prev_loc = Some(best.bbox);
            }
        }
        cursor.f_no += stride;
    }
    Ok(selected)
}
