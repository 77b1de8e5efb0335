//! Square float rasters, their binary on-disk format, and the raster-space
//! counterparts of the point-space normalization stages.
//!
//! Binary format (`.hkd`): magic `HKD1`, then width and height as 32-bit
//! little-endian unsigned integers, then row-major 32-bit little-endian
//! IEEE-754 values. Depth frames store millimeters with 0 = missing;
//! normalized images store values in `[-1, 1]` with background exactly +1.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Background value of normalized depth images: the far plane.
pub const BACKGROUND: f32 = 1.0;

const MAGIC: &[u8; 4] = b"HKD1";

/// Row-major single-channel float raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Raster {
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Raster {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f32) {
        self.data[row * self.width + col] = v;
    }

    pub fn write_hkd(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(12 + self.data.len() * 4);
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&(self.width as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.height as u32).to_le_bytes());
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_hkd(path: &Path) -> Result<Self> {
        let mut file =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut header = [0u8; 12];
        file.read_exact(&mut header)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if &header[0..4] != MAGIC {
            return Err(Error::format(path.display().to_string(), "bad magic"));
        }
        let width = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if raw.len() != width * height * 4 {
            return Err(Error::format(
                path.display().to_string(),
                format!(
                    "expected {} payload bytes, found {}",
                    width * height * 4,
                    raw.len()
                ),
            ));
        }
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    /// Writes an 8-bit grayscale PGM for visual inspection, mapping
    /// `[-1, 1]` to `[0, 255]` (only meaningful for normalized images).
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.data.len() + 32);
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        for v in &self.data {
            let byte = (((v + 1.0) * 0.5).clamp(0.0, 1.0) * 255.0).round() as u8;
            out.push(byte);
        }
        std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[inline]
fn is_background(v: f32) -> bool {
    v >= BACKGROUND
}

/// Median filter applied to foreground pixels only: each hand pixel takes
/// the median of the foreground values in its 3x3 neighbourhood (replicated
/// at borders), background pixels stay background. This smooths depth
/// without eroding the silhouette or bleeding the far plane into it.
pub fn median_filter_fg(img: &Raster) -> Raster {
    let mut out = img.clone();
    let (w, h) = (img.width as isize, img.height as isize);
    let mut window = [0f32; 9];
    for r in 0..h {
        for c in 0..w {
            let center = img.get(r as usize, c as usize);
            if is_background(center) {
                continue;
            }
            let mut n = 0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let rr = (r + dr).clamp(0, h - 1) as usize;
                    let cc = (c + dc).clamp(0, w - 1) as usize;
                    let v = img.get(rr, cc);
                    if !is_background(v) {
                        window[n] = v;
                        n += 1;
                    }
                }
            }
            let vals = &mut window[..n];
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            out.set(r as usize, c as usize, vals[n / 2]);
        }
    }
    out
}

/// Bilinear sample at continuous pixel coordinates (x right, y down, pixel
/// centers at half-integers), excluding background pixels from the blend.
/// Returns `None` when every contributing pixel is background or the sample
/// point is outside the raster.
fn bilinear_fg(img: &Raster, x: f64, y: f64) -> Option<f32> {
    if x < 0.0 || y < 0.0 || x > img.width as f64 || y > img.height as f64 {
        return None;
    }
    let gx = x - 0.5;
    let gy = y - 0.5;
    let c0 = gx.floor();
    let r0 = gy.floor();
    let fx = gx - c0;
    let fy = gy - r0;
    let mut value = 0.0f64;
    let mut weight = 0.0f64;
    for (dr, wr) in [(0.0, 1.0 - fy), (1.0, fy)] {
        for (dc, wc) in [(0.0, 1.0 - fx), (1.0, fx)] {
            let rr = r0 + dr;
            let cc = c0 + dc;
            if rr < 0.0 || cc < 0.0 || rr >= img.height as f64 || cc >= img.width as f64 {
                continue;
            }
            let v = img.get(rr as usize, cc as usize);
            if is_background(v) {
                continue;
            }
            let w = wr * wc;
            value += f64::from(v) * w;
            weight += w;
        }
    }
    if weight <= 1e-9 {
        None
    } else {
        Some((value / weight) as f32)
    }
}

/// Crops the central window shifted to the estimated middle-MCP position and
/// re-centers depth values on its estimated depth.
///
/// `t_est_mm` is the translation estimate in the COM-relative frame;
/// `cube_size_mm` fixes the mm-per-pixel scale of the source raster. The
/// shift is rounded to whole pixels. When the requested window would leave
/// the source raster it is clamped and the warning flag is set.
pub fn crop_recenter_raster(
    img: &Raster,
    t_est_mm: [f64; 3],
    cube_size_mm: f64,
    out_size: usize,
) -> Result<(Raster, bool)> {
    if out_size > img.width || out_size > img.height {
        return Err(Error::invalid(format!(
            "crop size {out_size} exceeds raster {}x{}",
            img.width, img.height
        )));
    }
    let mm_per_px = cube_size_mm / img.width as f64;
    let max_col = (img.width - out_size) as isize;
    let max_row = (img.height - out_size) as isize;
    let want_col = (img.width as isize - out_size as isize) / 2
        + (t_est_mm[0] / mm_per_px).round() as isize;
    let want_row = (img.height as isize - out_size as isize) / 2
        + (t_est_mm[1] / mm_per_px).round() as isize;
    let col0 = want_col.clamp(0, max_col);
    let row0 = want_row.clamp(0, max_row);
    let clamped = col0 != want_col || row0 != want_row;

    let half = cube_size_mm / 2.0;
    let depth_shift = (t_est_mm[2] / half) as f32;
    let mut out = Raster::filled(out_size, out_size, BACKGROUND);
    for r in 0..out_size {
        for c in 0..out_size {
            let v = img.get(row0 as usize + r, col0 as usize + c);
            if is_background(v) {
                continue;
            }
            out.set(r, c, (v - depth_shift).clamp(-1.0, 1.0));
        }
    }
    Ok((out, clamped))
}

/// Rotates raster content by `angle` about the image center (the same
/// convention as rotating points by `Rz(angle)`); depth values pass through.
pub fn rotate_raster(img: &Raster, angle_rad: f64) -> Raster {
    let (s, c) = (-angle_rad).sin_cos();
    let cx = img.width as f64 / 2.0;
    let cy = img.height as f64 / 2.0;
    let mut out = Raster::filled(img.width, img.height, BACKGROUND);
    for r in 0..img.height {
        for col in 0..img.width {
            let x = col as f64 + 0.5 - cx;
            let y = r as f64 + 0.5 - cy;
            let sx = c * x - s * y + cx;
            let sy = s * x + c * y + cy;
            if let Some(v) = bilinear_fg(img, sx, sy) {
                out.set(r, col, v);
            }
        }
    }
    out
}

/// Scales raster content (and depth values) by `factor` about the image
/// center, in all three directions.
pub fn rescale_raster(img: &Raster, factor: f64) -> Result<Raster> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid(format!(
            "rescale factor must be positive, got {factor}"
        )));
    }
    let cx = img.width as f64 / 2.0;
    let cy = img.height as f64 / 2.0;
    let mut out = Raster::filled(img.width, img.height, BACKGROUND);
    for r in 0..img.height {
        for col in 0..img.width {
            let x = (col as f64 + 0.5 - cx) / factor + cx;
            let y = (r as f64 + 0.5 - cy) / factor + cy;
            if let Some(v) = bilinear_fg(img, x, y) {
                out.set(r, col, ((v as f64 * factor) as f32).clamp(-1.0, 1.0));
            }
        }
    }
    Ok(out)
}

/// Plain average pooling by an integer factor (network input downsample;
/// background participates in the average).
pub fn avg_pool(img: &Raster, k: usize) -> Raster {
    assert!(k >= 1 && img.width % k == 0 && img.height % k == 0);
    let w = img.width / k;
    let h = img.height / k;
    let mut out = Raster::filled(w, h, 0.0);
    let norm = 1.0 / (k * k) as f64;
    for r in 0..h {
        for c in 0..w {
            let mut sum = 0.0f64;
            for dr in 0..k {
                for dc in 0..k {
                    sum += f64::from(img.get(r * k + dr, c * k + dc));
                }
            }
            out.set(r, c, (sum * norm) as f32);
        }
    }
    out
}
