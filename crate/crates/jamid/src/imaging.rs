//! Render a time-frequency matrix into the fixed-size color image consumed
//! by the classifiers: decibel scale, per-image min/max normalization,
//! area-average resize to 128×128, jet colormap, 8-bit quantization, and
//! lossless PNG round-tripping.

use std::path::Path;

use crate::error::{JamError, Result};
use crate::jamming::JammerClass;
use crate::tft::{Tfr, TfrKind};

/// Output raster side length.
pub const IMAGE_SIZE: usize = 128;

/// Floor applied before the logarithm.
pub const LOG_EPS: f64 = 1e-12;

/// 128×128 RGB image with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TfrImage {
    /// Row-major RGB bytes, index `(y·128 + x)·3 + channel`.
    pub pixels: Vec<u8>,
    /// Transform that produced the source matrix.
    pub kind: TfrKind,
    /// Jammer class, when known.
    pub label: JammerClass,
    /// Scenario case, when known.
    pub case_id: Option<String>,
    /// True when the source matrix had zero dynamic range and was mapped to
    /// the colormap origin everywhere.
    pub degenerate: bool,
}

impl TfrImage {
    /// Pixel at `(x, y)` as `[r, g, b]`.
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * IMAGE_SIZE + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Jet colormap on `u ∈ [0,1]`, returning channels in `[0,1]`.
pub fn jet(u: f64) -> [f64; 3] {
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    [
        clamp(1.5 - (4.0 * u - 3.0).abs()),
        clamp(1.5 - (4.0 * u - 2.0).abs()),
        clamp(1.5 - (4.0 * u - 1.0).abs()),
    ]
}

/// Exact area-average (box filter) resize of a row-major matrix.
fn box_resize(src: &[f64], rows: usize, cols: usize, out_rows: usize, out_cols: usize) -> Vec<f64> {
    let sy = rows as f64 / out_rows as f64;
    let sx = cols as f64 / out_cols as f64;
    let spans = |scale: f64, count: usize, limit: usize| -> Vec<Vec<(usize, f64)>> {
        (0..count)
            .map(|i| {
                let lo = i as f64 * scale;
                let hi = (i + 1) as f64 * scale;
                let mut parts = Vec::new();
                let mut p = lo.floor() as usize;
                while (p as f64) < hi && p < limit {
                    let cover = hi.min(p as f64 + 1.0) - lo.max(p as f64);
                    if cover > 0.0 {
                        parts.push((p, cover));
                    }
                    p += 1;
                }
                parts
            })
            .collect()
    };
    let row_spans = spans(sy, out_rows, rows);
    let col_spans = spans(sx, out_cols, cols);
    let mut out = vec![0.0f64; out_rows * out_cols];
    for (oy, rs) in row_spans.iter().enumerate() {
        for (ox, cs) in col_spans.iter().enumerate() {
            let mut acc = 0.0;
            let mut w = 0.0;
            for &(y, wy) in rs {
                for &(x, wx) in cs {
                    acc += src[y * cols + x] * wy * wx;
                    w += wy * wx;
                }
            }
            out[oy * out_cols + ox] = acc / w;
        }
    }
    out
}

/// Render a Tfr: `10·log10(max(v, ε))`, per-image min/max normalization,
/// area-average resize to 128×128, jet colormap, `round(255·channel)`
/// quantization. A zero-dynamic-range input maps to `u = 0` everywhere and is
/// flagged degenerate.
pub fn render(t: &Tfr) -> Result<TfrImage> {
    t.validate()?;
    let db: Vec<f64> = t.values.iter().map(|&v| 10.0 * v.max(LOG_EPS).log10()).collect();
    let lo = db.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = hi <= lo;
    let normalized: Vec<f64> = if degenerate {
        vec![0.0; db.len()]
    } else {
        db.iter().map(|v| (v - lo) / (hi - lo)).collect()
    };
    let resized = box_resize(&normalized, t.rows, t.cols, IMAGE_SIZE, IMAGE_SIZE);
    let mut pixels = Vec::with_capacity(IMAGE_SIZE * IMAGE_SIZE * 3);
    for &u in &resized {
        for c in jet(u) {
            pixels.push((255.0 * c).round() as u8);
        }
    }
    Ok(TfrImage { pixels, kind: t.kind, label: JammerClass::None, case_id: None, degenerate })
}

/// Write the image as a lossless 8-bit RGB PNG.
pub fn save_png(img: &TfrImage, path: &Path) -> Result<()> {
    let buf = image::RgbImage::from_raw(IMAGE_SIZE as u32, IMAGE_SIZE as u32, img.pixels.clone())
        .ok_or_else(|| JamError::Structural("pixel buffer does not match 128×128×3".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| JamError::Format(format!("PNG encode failed for {}: {e}", path.display())))
}

/// Load a 128×128 RGB PNG saved by [`save_png`].
pub fn load_png(path: &Path) -> Result<TfrImage> {
    let img = image::open(path)
        .map_err(|e| JamError::Format(format!("PNG decode failed for {}: {e}", path.display())))?
        .into_rgb8();
    if img.width() as usize != IMAGE_SIZE || img.height() as usize != IMAGE_SIZE {
        return Err(JamError::Structural(format!(
            "expected {IMAGE_SIZE}×{IMAGE_SIZE} image, got {}×{}",
            img.width(),
            img.height()
        )));
    }
    Ok(TfrImage {
        pixels: img.into_raw(),
        kind: TfrKind::Spec,
        label: JammerClass::None,
        case_id: None,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tft::TfrKind;

    fn tfr_from(values: Vec<f64>, rows: usize, cols: usize) -> Tfr {
        Tfr { values, rows, cols, kind: TfrKind::Spec, time_step: 1.0 }
    }

    #[test]
    fn jet_anchor_points() {
        let q = |u: f64| jet(u).map(|c| (255.0 * c).round() as u8);
        assert_eq!(q(0.0), [0, 0, 128]);
        assert_eq!(q(1.0), [128, 0, 0]);
        assert_eq!(q(0.5), [128, 255, 128]);
    }

    #[test]
    fn jet_cold_to_hot_ordering() {
        // Blue dominates the cold half, red the hot half, balanced midpoint.
        for i in 0..50 {
            let [r, _, b] = jet(i as f64 / 100.0);
            assert!(b > r, "u={} should be blue-dominant", i as f64 / 100.0);
        }
        for i in 51..=100 {
            let [r, _, b] = jet(i as f64 / 100.0);
            assert!(r > b, "u={} should be red-dominant", i as f64 / 100.0);
        }
        let [r, _, b] = jet(0.5);
        assert!((r - b).abs() < 1e-12);
    }

    #[test]
    fn render_scale_invariant() {
        let values: Vec<f64> = (0..200 * 150).map(|i| ((i * 37) % 991) as f64 + 0.5).collect();
        let t = tfr_from(values.clone(), 200, 150);
        let t2 = tfr_from(values.iter().map(|v| v * 7.3).collect(), 200, 150);
        assert_eq!(render(&t).unwrap().pixels, render(&t2).unwrap().pixels);
    }

    #[test]
    fn degenerate_input_flagged_and_blue() {
        let t = tfr_from(vec![5.0; 256 * 256], 256, 256);
        let img = render(&t).unwrap();
        assert!(img.degenerate);
        assert!(img.pixels.chunks(3).all(|p| p == [0, 0, 128]));
    }

    #[test]
    fn resize_preserves_constant_intensity() {
        let out = box_resize(&vec![3.5; 300 * 220], 300, 220, 128, 128);
        for v in out {
            assert!((v - 3.5).abs() / 3.5 < 0.01);
        }
    }

    #[test]
    fn resize_preserves_mean_value() {
        let src: Vec<f64> = (0..256 * 146).map(|i| ((i * 13) % 100) as f64).collect();
        let mean_in = src.iter().sum::<f64>() / src.len() as f64;
        let out = box_resize(&src, 256, 146, 128, 128);
        let mean_out = out.iter().sum::<f64>() / out.len() as f64;
        assert!((mean_in - mean_out).abs() / mean_in < 0.01);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let values: Vec<f64> = (0..256 * 146).map(|i| (i % 777) as f64 + 1.0).collect();
        let img = render(&tfr_from(values, 256, 146)).unwrap();
        save_png(&img, &path).unwrap();
        let back = load_png(&path).unwrap();
        assert_eq!(img.pixels, back.pixels);
        // Saving twice yields identical bytes.
        let path2 = dir.path().join("img2.png");
        save_png(&img, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn load_rejects_wrong_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("small.png");
        image::RgbImage::new(64, 64).save(&path).unwrap();
        assert!(matches!(load_png(&path), Err(JamError::Structural(_))));
    }
}
