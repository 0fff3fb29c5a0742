//! Comparator, detection store and query: mismatch distance, JSONL
//! persistence, target-plate search and the time/location report.
//!
//! The comparator's distance is deliberately blunt: positional mismatches
//! over the common prefix plus the length difference. A recognizer that
//! got the plate nearly right lands within a small distance; a full edit
//! distance would also forgive segmentation dropouts that the fixed
//! threshold is meant to reject.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BBox;
use crate::plate_format::{normalize, PlateText};
use crate::recognizer::RecognitionCandidate;

/// One recognized plate occurrence, as persisted in the detection store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub camera_id: String,
    pub video_id: String,
    pub frame_index: usize,
    /// Seconds from video start (plus the manifest epoch when present).
    pub timestamp_s: f64,
    /// The region the recognizer actually read (extension included).
    #[serde(rename = "box")]
    pub bbox: BBox,
    /// Per-variant readings, best first; never empty, at most twenty.
    pub candidates: Vec<RecognitionCandidate>,
    /// The top candidate's corrected text, when it has one.
    pub best_text: Option<PlateText>,
}

/// A detection that matched a queried plate.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub detection: Detection,
    /// Minimum mismatch distance over the detection's candidates.
    pub distance: usize,
    /// Index of the candidate attaining that minimum.
    pub matched_candidate: usize,
}

/// Mismatch distance: positional disagreements over the first
/// `min(|a|, |b|)` characters plus the length difference.
pub fn distance(a: &PlateText, b: &PlateText) -> usize {
    let mismatches = a
        .as_str()
        .bytes()
        .zip(b.as_str().bytes())
        .filter(|(x, y)| x != y)
        .count();
    mismatches + a.len().abs_diff(b.len())
}

/// Text a candidate contributes to matching: the corrected form when
/// present, otherwise the normalized raw reading when it normalizes.
fn candidate_text(c: &RecognitionCandidate) -> Option<PlateText> {
    c.corrected_text
        .clone()
        .or_else(|| normalize(&c.raw_text).ok())
}

/// Compares a target plate against every usable candidate of a detection.
/// Returns the minimizing candidate when its distance is within the
/// (inclusive) threshold; ties go to the higher-confidence candidate.
pub fn match_detection(
    target: &PlateText,
    det: &Detection,
    threshold: usize,
) -> Option<MatchResult> {
    let mut best: Option<(usize, f64, usize)> = None;
    for (i, cand) in det.candidates.iter().enumerate() {
        let Some(text) = candidate_text(cand) else {
            continue;
        };
        let d = distance(target, &text);
        let better = match &best {
            None => true,
            Some((bd, bconf, _)) => d < *bd || (d == *bd && cand.confidence > *bconf),
        };
        if better {
            best = Some((d, cand.confidence, i));
        }
    }
    let (d, _, idx) = best?;
    (d <= threshold).then(|| MatchResult {
        detection: det.clone(),
        distance: d,
        matched_candidate: idx,
    })
}

/// Appends one detection to a JSONL store file, creating it on first use.
/// One JSON object per line, newline-terminated, append-only.
pub fn store_append(path: &Path, det: &Detection) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let line = serde_json::to_string(det).expect("detection serializes");
    file.write_all(line.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))
}

/// Reads every detection in a store file, in append order.
pub fn read_store(path: &Path) -> Result<Vec<Detection>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut detections = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let det = serde_json::from_str(&line).map_err(|_| Error::MalformedRecord(no + 1))?;
        detections.push(det);
    }
    Ok(detections)
}

/// Scans a store for detections matching a target plate, ordered by
/// `(video_id, timestamp_s)`.
pub fn query(path: &Path, target: &PlateText, threshold: usize) -> Result<Vec<MatchResult>> {
    let mut matches: Vec<MatchResult> = read_store(path)?
        .iter()
        .filter_map(|det| match_detection(target, det, threshold))
        .collect();
    matches.sort_by(|a, b| {
        a.detection
            .video_id
            .cmp(&b.detection.video_id)
            .then_with(|| {
                a.detection
                    .timestamp_s
                    .partial_cmp(&b.detection.timestamp_s)
                    .unwrap()
            })
    });
    Ok(matches)
}

/// Renders match results as CSV: a header plus one row per match, in input
/// order, timestamps with two decimals.
pub fn report(target: &PlateText, matches: &[MatchResult]) -> String {
    let mut out = String::from("plate,timestamp_s,camera_id,video_id,frame_index,distance\n");
    for m in matches {
        out.push_str(&format!(
            "{},{:.2},{},{},{},{}\n",
            target,
            m.detection.timestamp_s,
            m.detection.camera_id,
            m.detection.video_id,
            m.detection.frame_index,
            m.distance
        ));
    }
    out
}
