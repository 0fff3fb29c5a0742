//! Plate localization: a pluggable detector contract plus the built-in
//! classical edge-density localizer.
//!
//! Plates are text-dense rectangles, so their signature is a horizontal
//! run of strong horizontal gradients. The built-in localizer thresholds
//! central-difference gradients, closes small gaps with a wide structuring
//! element so glyph edges fuse into one blob, and keeps connected
//! components that look plate-shaped. Any component with the same
//! signature — including a learned model — can replace it behind
//! [`PlateDetector`].

use crate::imaging::{BBox, GrayImage};

/// Horizontal extension applied to each detected box, in pixels per side.
pub const ROI_EXTENSION_PX: usize = 20;

/// Geometry and sensitivity bounds for the edge-density localizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Minimum candidate width in pixels (>= 8).
    pub min_w: usize,
    /// Minimum candidate height in pixels (>= 4).
    pub min_h: usize,
    /// Lower aspect-ratio bound (width / height), >= 1.
    pub aspect_min: f64,
    /// Upper aspect-ratio bound, > aspect_min.
    pub aspect_max: f64,
    /// Gradient magnitude at or above which a pixel counts as an edge.
    pub edge_threshold: u8,
    /// Maximum number of candidates returned (>= 1).
    pub max_candidates: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            min_w: 40,
            min_h: 12,
            aspect_min: 2.0,
            aspect_max: 6.0,
            edge_threshold: 40,
            max_candidates: 4,
        }
    }
}

impl DetectorConfig {
    fn validate(&self) {
        assert!(self.min_w >= 8 && self.min_h >= 4, "minimum size too small");
        assert!(
            self.aspect_min >= 1.0 && self.aspect_min < self.aspect_max,
            "need 1 <= aspect_min < aspect_max"
        );
        assert!(self.max_candidates >= 1, "need at least one candidate slot");
    }
}

/// One plate hypothesis: its box and an edge-density confidence in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateCandidate {
    pub bbox: BBox,
    pub score: f64,
}

/// Detector contract: anything that maps a frame to plate candidates,
/// sorted by descending score.
pub trait PlateDetector {
    fn detect(&self, frame: &GrayImage) -> Vec<PlateCandidate>;
}

/// The built-in classical localizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeDetector {
    pub config: DetectorConfig,
}

impl EdgeDetector {
    pub fn new(config: DetectorConfig) -> Self {
        EdgeDetector { config }
    }
}

impl PlateDetector for EdgeDetector {
    fn detect(&self, frame: &GrayImage) -> Vec<PlateCandidate> {
        detect_plates(frame, &self.config)
    }
}

/// Binary mask helper: morphological dilation (any) or erosion (all) with
/// a wxh window, zero padding outside the frame.
fn morph(mask: &[bool], w: usize, h: usize, win_w: usize, win_h: usize, dilate: bool) -> Vec<bool> {
    let rx = win_w / 2;
    let ry = win_h / 2;
    // Horizontal pass.
    let mut horiz = vec![false; mask.len()];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let lo = x.saturating_sub(rx);
            let hi = (x + rx).min(w - 1);
            let slice = &mask[row + lo..=row + hi];
            // Zero padding: a window reaching past the frame sees "false"
            // there, which can never satisfy erosion's full-window rule.
            let complete = hi - lo + 1 == win_w;
            horiz[row + x] = if dilate {
                slice.iter().any(|&v| v)
            } else {
                complete && slice.iter().all(|&v| v)
            };
        }
    }
    // Vertical pass.
    let mut out = vec![false; mask.len()];
    for y in 0..h {
        let lo = y.saturating_sub(ry);
        let hi = (y + ry).min(h - 1);
        let complete = hi - lo + 1 == win_h;
        for x in 0..w {
            let mut column = (lo..=hi).map(|yy| horiz[yy * w + x]);
            out[y * w + x] = if dilate {
                column.any(|v| v)
            } else {
                complete && column.all(|v| v)
            };
        }
    }
    out
}

/// Localizes plate-shaped regions. The frame is reduced to a horizontal
/// gradient edge mask, closed with a 9x3 window, and split into 4-connected
/// components; components passing the size and aspect filters are scored
/// by the fraction of edge pixels inside their box. Candidates come back
/// sorted by score descending, ties by (y, x), at most `max_candidates`.
pub fn detect_plates(frame: &GrayImage, cfg: &DetectorConfig) -> Vec<PlateCandidate> {
    cfg.validate();
    let w = frame.width();
    let h = frame.height();
    if w < cfg.min_w || h < cfg.min_h {
        return Vec::new();
    }

    // Central-difference horizontal gradient, edge-replicated at borders.
    // |I(x+1) - I(x-1)| / 2 >= threshold, kept in integer arithmetic.
    let thr2 = 2 * cfg.edge_threshold as i32;
    let mut edges = vec![false; w * h];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let left = frame.get(x.saturating_sub(1), y) as i32;
            let right = frame.get((x + 1).min(w - 1), y) as i32;
            edges[row + x] = (right - left).abs() >= thr2;
        }
    }

    // Closing with a 9x3 horizontal structuring element fuses glyph edges
    // into one blob per plate.
    let dilated = morph(&edges, w, h, 9, 3, true);
    let closed = morph(&dilated, w, h, 9, 3, false);

    // 4-connected components of the closed mask.
    let mut seen = vec![false; w * h];
    let mut candidates = Vec::new();
    for start in 0..w * h {
        if seen[start] || !closed[start] {
            continue;
        }
        let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0usize, 0usize);
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |np: usize| {
                if !seen[np] && closed[np] {
                    seen[np] = true;
                    stack.push(np);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        let bbox = BBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
        let aspect = bbox.w as f64 / bbox.h as f64;
        if bbox.w < cfg.min_w
            || bbox.h < cfg.min_h
            || aspect < cfg.aspect_min
            || aspect > cfg.aspect_max
        {
            continue;
        }
        let mut edge_count = 0usize;
        for y in bbox.y..bbox.bottom() {
            for x in bbox.x..bbox.right() {
                if edges[y * w + x] {
                    edge_count += 1;
                }
            }
        }
        candidates.push(PlateCandidate {
            bbox,
            score: edge_count as f64 / bbox.area() as f64,
        });
    }

    candidates.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| (a.bbox.y, a.bbox.x).cmp(&(b.bbox.y, b.bbox.x)))
    });
    candidates.truncate(cfg.max_candidates);
    candidates
}

/// Widens a detected box by [`ROI_EXTENSION_PX`] on the left and right so
/// edge characters are never cut off, clamping to the frame. Vertical
/// extent passes through unchanged.
pub fn extend_roi(bbox: &BBox, frame_w: usize, frame_h: usize) -> BBox {
    debug_assert!(bbox.fits_in(frame_w, frame_h), "box must start inside frame");
    let x = bbox.x.saturating_sub(ROI_EXTENSION_PX);
    let right = (bbox.x + bbox.w + ROI_EXTENSION_PX).min(frame_w);
    BBox::new(x, bbox.y, right - x, bbox.h)
}
