//! Synthetic scene generation: the ground-truth oracle for every
//! end-to-end test.
//!
//! Plates are rendered from the same glyph atlas the recognizer matches
//! against, so a clean render reads back exactly. Scenes composite a
//! (possibly rotated) plate sprite onto a textured background along a
//! waypoint path, degrade every frame with a seeded recipe, and emit the
//! exact box of the plate in every frame it appears in. Corpus generation
//! wraps this per (plate, tier) and writes frames, manifest and truth to
//! disk, byte-identically for a fixed seed.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enhancer::{degrade, Blur, DegradeSpec};
use crate::error::{Error, Result};
use crate::imaging::{rotate, write_gray_file, GrayImage};
use crate::plate_format::PlateText;
use crate::recognizer::{GlyphAtlas, GLYPH_H, GLYPH_W};

/// Rendered plate height in pixels: one glyph row plus margins.
pub const PLATE_RENDER_HEIGHT: usize = 40;
/// White margin around the glyph row in a rendered plate.
pub const PLATE_MARGIN: usize = 8;
/// Horizontal gap between glyph cells.
pub const GLYPH_GAP: usize = 4;
/// White padding around the plate in a scene sprite; absorbs the corner
/// excursion of up to 12-degree rotations so no glyph rotates out.
pub const SPRITE_PAD: usize = 24;

/// Renders a plate: black glyphs from the embedded atlas on white, 16x24
/// cells, 4 px apart, 8 px margin. An `n`-character plate comes out
/// `(16 + 16 n + 4 (n - 1)) x 40` pixels. Deterministic.
pub fn render_plate(text: &PlateText) -> GrayImage {
    let atlas = GlyphAtlas::builtin();
    let n = text.len();
    let width = 2 * PLATE_MARGIN + n * GLYPH_W + (n - 1) * GLYPH_GAP;
    let mut img = GrayImage::filled(width, PLATE_RENDER_HEIGHT, 255);
    for (i, c) in text.as_str().chars().enumerate() {
        let glyph = atlas.glyph(c).expect("plate symbols are in the atlas");
        let ox = PLATE_MARGIN + i * (GLYPH_W + GLYPH_GAP);
        for y in 0..GLYPH_H {
            for x in 0..GLYPH_W {
                if glyph.get(x, y) == 255 {
                    img.set(ox + x, PLATE_MARGIN + y, 0);
                }
            }
        }
    }
    img
}

/// Copies `src` into `dst` with its top-left corner at `(x, y)`.
/// The source must fit.
pub fn paste(dst: &mut GrayImage, src: &GrayImage, x: usize, y: usize) {
    assert!(x + src.width() <= dst.width() && y + src.height() <= dst.height());
    for sy in 0..src.height() {
        for sx in 0..src.width() {
            dst.set(x + sx, y + sy, src.get(sx, sy));
        }
    }
}

/// Description of one synthetic scene.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub plate_text: PlateText,
    /// Frame dimensions `(width, height)`.
    pub frame_size: (usize, usize),
    pub n_frames: usize,
    /// Waypoints `(frame_index, plate center)`, strictly increasing in
    /// frame index; positions interpolate linearly between them.
    pub path: Vec<(usize, (f64, f64))>,
    /// In-plane plate rotation in degrees, within [-12, 12].
    pub plate_rotation_deg: f64,
    pub degrade: DegradeSpec,
    /// Half-open frame interval `[first, last)` the plate is visible in.
    pub presence: (usize, usize),
}

/// Exact plate box in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthBox {
    pub frame_index: usize,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Generator-emitted truth for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub plate_text: PlateText,
    /// Half-open `[first, last)`.
    pub presence: [usize; 2],
    /// One entry per frame inside the presence interval, in frame order.
    pub boxes: Vec<TruthBox>,
}

/// Frame-sequence description: how a processed "video" is laid out on
/// disk. Frame paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoManifest {
    pub video_id: String,
    pub camera_id: String,
    pub fps: u32,
    pub frames: Vec<String>,
    /// Optional wall-clock offset added to every timestamp.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub start_epoch_s: Option<f64>,
    #[serde(skip, default)]
    base_dir: PathBuf,
}

impl VideoManifest {
    /// Absolute path of frame `i`.
    pub fn frame_path(&self, i: usize) -> PathBuf {
        self.base_dir.join(&self.frames[i])
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<VideoManifest> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: VideoManifest =
            serde_json::from_slice(&bytes).map_err(|_| Error::MalformedRecord(1))?;
        manifest.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(manifest)
    }
}

impl GroundTruth {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("truth serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<GroundTruth> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|_| Error::MalformedRecord(1))
    }
}

fn interpolate(path: &[(usize, (f64, f64))], frame: usize) -> (f64, f64) {
    let first = path.first().expect("path is non-empty");
    let last = path.last().unwrap();
    if frame <= first.0 {
        return first.1;
    }
    if frame >= last.0 {
        return last.1;
    }
    let seg = path.windows(2).find(|w| w[0].0 <= frame && frame <= w[1].0);
    let [(f0, (x0, y0)), (f1, (x1, y1))] = seg.expect("waypoints cover the interval") else {
        unreachable!()
    };
    let t = (frame - f0) as f64 / (f1 - f0) as f64;
    (x0 + (x1 - x0) * t, y0 + (y1 - y0) * t)
}

/// Per-frame noise seed, derived so every frame gets fresh but
/// reproducible noise.
fn frame_seed(base: u64, frame: usize) -> u64 {
    base.wrapping_add((frame as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Builds the scene sprite: the rendered plate inside a background-gray
/// pad, rotated in place. The gray pad absorbs rotation overshoot while
/// keeping the plate's white-on-gray boundary, which is what the detector
/// keys on. Returns the sprite and the tight box of the visible plate
/// within it.
fn scene_sprite(text: &PlateText, rotation_deg: f64) -> (GrayImage, (usize, usize, usize, usize)) {
    let plate = render_plate(text);
    let mut padded = GrayImage::filled(
        plate.width() + 2 * SPRITE_PAD,
        plate.height() + 2 * SPRITE_PAD,
        128,
    );
    paste(&mut padded, &plate, SPRITE_PAD, SPRITE_PAD);
    let sprite = rotate(&padded, rotation_deg);
    // Tight box of plate content: everything that is not pad gray.
    let (mut x0, mut y0, mut x1, mut y1) = (sprite.width(), sprite.height(), 0usize, 0usize);
    for y in 0..sprite.height() {
        for x in 0..sprite.width() {
            if (sprite.get(x, y) as i16 - 128).abs() > 24 {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    (sprite, (x0, y0, x1 - x0, y1 - y0))
}

/// Renders all frames of a scene plus its ground truth.
///
/// The background is flat gray 128 carrying a faint seeded texture (static
/// across frames, like the surface a fixed camera stares at). During the
/// presence interval the sprite is composited at the interpolated
/// position; every frame is then degraded with a per-frame seed.
pub fn make_scene(spec: &SceneSpec) -> Result<(Vec<GrayImage>, GroundTruth)> {
    let (fw, fh) = spec.frame_size;
    let (first, last) = spec.presence;
    if spec.n_frames == 0 {
        return Err(Error::SpecInvalid("scene needs at least one frame".into()));
    }
    if first >= last || last > spec.n_frames {
        return Err(Error::SpecInvalid(format!(
            "presence [{first}, {last}) outside frame range 0..{}",
            spec.n_frames
        )));
    }
    if spec.plate_rotation_deg.abs() > 12.0 {
        return Err(Error::SpecInvalid(format!(
            "plate rotation {} outside +/-12 degrees",
            spec.plate_rotation_deg
        )));
    }
    if !spec.degrade.is_valid() {
        return Err(Error::SpecInvalid("degrade recipe out of range".into()));
    }
    if spec.path.is_empty() {
        return Err(Error::SpecInvalid("path needs at least one waypoint".into()));
    }
    if spec.path.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::SpecInvalid(
            "waypoints must be strictly increasing in frame index".into(),
        ));
    }

    let (sprite, plate_box) = scene_sprite(&spec.plate_text, spec.plate_rotation_deg);
    let (sw, sh) = (sprite.width(), sprite.height());

    // Sprite placement for every presence frame, validated up front.
    let mut placements = Vec::with_capacity(last - first);
    for f in first..last {
        let (cx, cy) = interpolate(&spec.path, f);
        let x = (cx - sw as f64 / 2.0).round();
        let y = (cy - sh as f64 / 2.0).round();
        if x < 0.0 || y < 0.0 || x as usize + sw > fw || y as usize + sh > fh {
            return Err(Error::SpecInvalid(format!(
                "plate leaves the frame at frame {f}"
            )));
        }
        placements.push((f, x as usize, y as usize));
    }

    // Static background texture: gray 128 plus a faint dither, too weak to
    // register as edges.
    let mut texture_rng = ChaCha8Rng::seed_from_u64(spec.degrade.seed ^ 0x7465_7874_7572_65);
    let base_data: Vec<u8> = (0..fw * fh)
        .map(|_| (128i16 + texture_rng.random_range(-8i16..=8)) as u8)
        .collect();
    let background = GrayImage::from_raw(fw, fh, base_data);

    let mut frames = Vec::with_capacity(spec.n_frames);
    let mut boxes = Vec::with_capacity(placements.len());
    let mut placement_iter = placements.iter().peekable();
    for f in 0..spec.n_frames {
        let mut frame = background.clone();
        if let Some(&&(pf, x, y)) = placement_iter.peek() {
            if pf == f {
                paste(&mut frame, &sprite, x, y);
                boxes.push(TruthBox {
                    frame_index: f,
                    x: x + plate_box.0,
                    y: y + plate_box.1,
                    w: plate_box.2,
                    h: plate_box.3,
                });
                placement_iter.next();
            }
        }
        let spec_f = DegradeSpec {
            seed: frame_seed(spec.degrade.seed, f),
            ..spec.degrade.clone()
        };
        frames.push(degrade(&frame, &spec_f));
    }

    Ok((
        frames,
        GroundTruth {
            plate_text: spec.plate_text.clone(),
            presence: [first, last],
            boxes,
        },
    ))
}

/// A named degradation bundle for corpus generation.
#[derive(Debug, Clone)]
pub struct DegradeTier {
    pub name: String,
    pub noise_sigma: f64,
    pub blur: Blur,
    pub contrast_scale: f64,
    /// Scene plate rotations are drawn uniformly from +/- this bound.
    pub max_rotation_deg: f64,
}

impl DegradeTier {
    /// Everyday footage: visible noise and softness, plates up to 6
    /// degrees off horizontal.
    pub fn mild() -> Self {
        DegradeTier {
            name: "mild".into(),
            noise_sigma: 6.0,
            blur: Blur::Gaussian(0.8),
            contrast_scale: 0.85,
            max_rotation_deg: 6.0,
        }
    }

    /// Failure-probing footage: heavy noise, median smearing, washed-out
    /// contrast, rotations to the full 12-degree bound.
    pub fn harsh() -> Self {
        DegradeTier {
            name: "harsh".into(),
            noise_sigma: 14.0,
            blur: Blur::Median(3),
            contrast_scale: 0.6,
            max_rotation_deg: 12.0,
        }
    }
}

/// Frame size generated corpus scenes use.
pub const CORPUS_FRAME_W: usize = 360;
pub const CORPUS_FRAME_H: usize = 200;
/// Frames per scene and the visibility window within them.
pub const CORPUS_FRAMES: usize = 36;
pub const CORPUS_PRESENCE: (usize, usize) = (4, 36);
/// Frame rate stamped into corpus manifests.
pub const CORPUS_FPS: u32 = 25;

/// Uniform random plate in the ten-character form: two letters, two
/// digits, two series letters, four serial digits.
pub fn random_plate(rng: &mut impl Rng) -> PlateText {
    let mut s = String::with_capacity(10);
    for slot in 0..10 {
        let c = match slot {
            0 | 1 | 4 | 5 => (b'A' + rng.random_range(0..26u8)) as char,
            _ => (b'0' + rng.random_range(0..10u8)) as char,
        };
        s.push(c);
    }
    PlateText::new(&s).expect("generated from the grammar")
}

/// Writes a frame sequence as P5 files under `dir/<video_id>/` along with
/// its manifest, and returns the manifest ready for processing.
pub fn write_frames(
    dir: &Path,
    video_id: &str,
    camera_id: &str,
    fps: u32,
    frames: &[GrayImage],
) -> Result<VideoManifest> {
    let scene_dir = dir.join(video_id);
    let frames_dir = scene_dir.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let mut frame_names = Vec::with_capacity(frames.len());
    for (i, img) in frames.iter().enumerate() {
        let name = format!("frames/f{i:04}.pgm");
        write_gray_file(&scene_dir.join(&name), img)?;
        frame_names.push(name);
    }
    let manifest = VideoManifest {
        video_id: video_id.to_owned(),
        camera_id: camera_id.to_owned(),
        fps,
        frames: frame_names,
        start_epoch_s: None,
        base_dir: scene_dir.clone(),
    };
    manifest.save(&scene_dir.join("manifest.json"))?;
    Ok(manifest)
}

/// Paths of one generated scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenePaths {
    pub manifest: PathBuf,
    pub truth: PathBuf,
}

/// Generates `n_plates` random plates and renders one scene per
/// (plate, tier) under `out_dir/<tier>/scene_<i>/`, writing P5 frames, a
/// manifest and a truth file per scene. Fully deterministic under `seed`.
pub fn gen_corpus(
    n_plates: usize,
    seed: u64,
    tiers: &[DegradeTier],
    out_dir: &Path,
) -> Result<Vec<ScenePaths>> {
    assert!(n_plates >= 1, "need at least one plate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plates: Vec<PlateText> = (0..n_plates).map(|_| random_plate(&mut rng)).collect();

    let mut out = Vec::new();
    for tier in tiers {
        for (i, plate) in plates.iter().enumerate() {
            let scene_dir = out_dir.join(&tier.name).join(format!("scene_{i:03}"));
            let frames_dir = scene_dir.join("frames");
            std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;

            // Scene geometry: start anywhere the sprite fits, drift by a
            // random amount that keeps it inside.
            let plate_w = 2 * PLATE_MARGIN + 10 * GLYPH_W + 9 * GLYPH_GAP;
            let sw = plate_w + 2 * SPRITE_PAD;
            let sh = PLATE_RENDER_HEIGHT + 2 * SPRITE_PAD;
            let half_w = sw as f64 / 2.0;
            let half_h = sh as f64 / 2.0;
            let x_lo = half_w + 1.0;
            let x_hi = CORPUS_FRAME_W as f64 - half_w - 1.0;
            let y_lo = half_h + 1.0;
            let y_hi = CORPUS_FRAME_H as f64 - half_h - 1.0;
            let x0 = rng.random_range(x_lo..=x_hi);
            let y0 = rng.random_range(y_lo..=y_hi);
            let x1 = rng.random_range(x_lo..=x_hi);
            let y1 = rng.random_range(y_lo..=y_hi);
            let rotation = rng.random_range(-tier.max_rotation_deg..=tier.max_rotation_deg);
            let degrade_seed = rng.random::<u64>();

            let spec = SceneSpec {
                plate_text: plate.clone(),
                frame_size: (CORPUS_FRAME_W, CORPUS_FRAME_H),
                n_frames: CORPUS_FRAMES,
                path: vec![(0, (x0, y0)), (CORPUS_FRAMES - 1, (x1, y1))],
                plate_rotation_deg: rotation,
                degrade: DegradeSpec {
                    noise_sigma: tier.noise_sigma,
                    blur: tier.blur,
                    contrast_scale: tier.contrast_scale,
                    seed: degrade_seed,
                },
                presence: CORPUS_PRESENCE,
            };
            let (frames, truth) = make_scene(&spec)?;

            let mut frame_names = Vec::with_capacity(frames.len());
            for (f, img) in frames.iter().enumerate() {
                let name = format!("frames/f{f:04}.pgm");
                write_gray_file(&scene_dir.join(&name), img)?;
                frame_names.push(name);
            }
            let manifest = VideoManifest {
                video_id: format!("{}-{i:03}", tier.name),
                camera_id: format!("cam{:02}", i % 5),
                fps: CORPUS_FPS,
                frames: frame_names,
                start_epoch_s: None,
                base_dir: scene_dir.clone(),
            };
            let manifest_path = scene_dir.join("manifest.json");
            let truth_path = scene_dir.join("truth.json");
            manifest.save(&manifest_path)?;
            truth.save(&truth_path)?;
            out.push(ScenePaths {
                manifest: manifest_path,
                truth: truth_path,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recognizer::recognize;

    fn plate(s: &str) -> PlateText {
        PlateText::new(s).unwrap()
    }

    #[test]
    fn render_size_formula() {
        let img = render_plate(&plate("TS09UB8902"));
        assert_eq!((img.width(), img.height()), (212, 40));
        let img6 = render_plate(&plate("KA51MD"));
        assert_eq!(img6.width(), 2 * 8 + 6 * 16 + 5 * 4);
    }

    #[test]
    fn render_is_deterministic() {
        assert_eq!(render_plate(&plate("AB12CD3456")), render_plate(&plate("AB12CD3456")));
    }

    #[test]
    fn render_recognize_closed_loop() {
        let truth = plate("KA51MD4182");
        let (text, conf) = recognize(&render_plate(&truth), GlyphAtlas::builtin()).unwrap();
        assert_eq!(text, truth.as_str());
        assert!(conf > 0.999);
    }

    fn stationary_spec() -> SceneSpec {
        SceneSpec {
            plate_text: plate("TS09UB8902"),
            frame_size: (360, 200),
            n_frames: 12,
            path: vec![(0, (180.0, 100.0))],
            plate_rotation_deg: 0.0,
            degrade: DegradeSpec::neutral(),
            presence: (0, 12),
        }
    }

    #[test]
    fn stationary_scene_has_constant_truth_box() {
        let (frames, truth) = make_scene(&stationary_spec()).unwrap();
        assert_eq!(frames.len(), 12);
        assert_eq!(truth.boxes.len(), 12);
        assert!(truth.boxes.windows(2).all(|w| {
            (w[0].x, w[0].y, w[0].w, w[0].h) == (w[1].x, w[1].y, w[1].w, w[1].h)
        }));
    }

    #[test]
    fn presence_window_counts_boxes() {
        let spec = SceneSpec {
            n_frames: 200,
            path: vec![(0, (120.0, 90.0)), (199, (230.0, 110.0))],
            presence: (100, 113),
            ..stationary_spec()
        };
        let (frames, truth) = make_scene(&spec).unwrap();
        assert_eq!(frames.len(), 200);
        assert_eq!(truth.boxes.len(), 13);
        assert!(truth.boxes.iter().all(|b| (100..113).contains(&b.frame_index)));
    }

    #[test]
    fn neutral_scene_preserves_plate_pixels() {
        let (frames, truth) = make_scene(&stationary_spec()).unwrap();
        let b = truth.boxes[0];
        let rendered = render_plate(&plate("TS09UB8902"));
        // At zero rotation the truth box is exactly the rendered plate,
        // untouched by a neutral recipe.
        assert_eq!((b.w, b.h), (rendered.width(), rendered.height()));
        for y in 0..rendered.height() {
            for x in 0..rendered.width() {
                assert_eq!(frames[0].get(b.x + x, b.y + y), rendered.get(x, y));
            }
        }
    }

    #[test]
    fn truth_boxes_stay_inside_frames() {
        let spec = SceneSpec {
            path: vec![(0, (140.0, 70.0)), (11, (215.0, 130.0))],
            ..stationary_spec()
        };
        let (_, truth) = make_scene(&spec).unwrap();
        for b in &truth.boxes {
            assert!(b.x + b.w <= 360 && b.y + b.h <= 200);
        }
    }

    #[test]
    fn out_of_frame_path_is_rejected() {
        let spec = SceneSpec {
            path: vec![(0, (10.0, 100.0))],
            ..stationary_spec()
        };
        assert!(matches!(make_scene(&spec), Err(Error::SpecInvalid(_))));
    }

    #[test]
    fn bad_presence_is_rejected() {
        let spec = SceneSpec {
            presence: (5, 20),
            ..stationary_spec()
        };
        assert!(matches!(make_scene(&spec), Err(Error::SpecInvalid(_))));
    }

    #[test]
    fn corpus_is_deterministic_and_complete() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let tiers = [DegradeTier::mild()];
        let a = gen_corpus(3, 99, &tiers, dir_a.path()).unwrap();
        let b = gen_corpus(3, 99, &tiers, dir_b.path()).unwrap();
        assert_eq!(a.len(), 3);
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(
                std::fs::read(&pa.manifest).unwrap(),
                std::fs::read(&pb.manifest).unwrap()
            );
            assert_eq!(
                std::fs::read(&pa.truth).unwrap(),
                std::fs::read(&pb.truth).unwrap()
            );
            // Spot-check one frame for byte identity.
            let ma = VideoManifest::load(&pa.manifest).unwrap();
            let mb = VideoManifest::load(&pb.manifest).unwrap();
            assert_eq!(
                std::fs::read(ma.frame_path(0)).unwrap(),
                std::fs::read(mb.frame_path(0)).unwrap()
            );
        }
    }

    #[test]
    fn generated_plates_validate() {
        use crate::plate_format::validate;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = random_plate(&mut rng);
            assert_eq!(p.len(), 10);
            assert!(validate(&p).is_ok());
        }
    }

    #[test]
    fn manifest_round_trips_with_relative_frames() {
        let dir = tempfile::tempdir().unwrap();
        let tiers = [DegradeTier::mild()];
        let paths = gen_corpus(1, 7, &tiers, dir.path()).unwrap();
        let manifest = VideoManifest::load(&paths[0].manifest).unwrap();
        assert_eq!(manifest.fps, CORPUS_FPS);
        assert_eq!(manifest.frames.len(), CORPUS_FRAMES);
        assert!(manifest.frame_path(0).exists());
        let truth = GroundTruth::load(&paths[0].truth).unwrap();
        assert_eq!(truth.presence, [4, 36]);
        assert_eq!(truth.boxes.len(), 32);
    }
}
