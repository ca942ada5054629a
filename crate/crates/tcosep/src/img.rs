//! Grayscale PGM ingestion.
//!
//! Reads a directory of P2 (ASCII) or P5 (binary) PGM images of one
//! common size, optionally resizes each by bilinear interpolation, and
//! stacks them as lateral slices: image `i` becomes `A(:, i, :)` with
//! `m` the image height, `p` the width and `n` the image count. Pixels
//! are scaled to `[0, 1]` by the file's maxval.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// One decoded grayscale image, row-major, values in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GrayImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.width + c]
    }
}

/// Parses a PGM (P2 or P5) byte stream.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;

    fn skip_space(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn token(bytes: &[u8], pos: &mut usize) -> Result<String> {
        skip_space(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    }

    let magic = token(bytes, &mut pos)?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::Format(format!("unsupported PGM magic {magic:?}")));
    }
    let width: usize = token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::Format("bad PGM width".into()))?;
    let height: usize = token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::Format("bad PGM height".into()))?;
    let maxval: u32 = token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::Format("bad PGM maxval".into()))?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::Format("PGM dimensions or maxval out of range".into()));
    }

    let count = width * height;
    let mut pixels = Vec::with_capacity(count);
    let scale = 1.0 / maxval as f64;
    if magic == "P2" {
        for _ in 0..count {
            let v: u32 = token(bytes, &mut pos)?
                .parse()
                .map_err(|_| Error::Format("bad ASCII pixel".into()))?;
            if v > maxval {
                return Err(Error::Format(format!("pixel {v} above maxval {maxval}")));
            }
            pixels.push(v as f64 * scale);
        }
    } else {
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Format("missing raster separator in P5".into()));
        }
        pos += 1;
        let per = if maxval < 256 { 1 } else { 2 };
        let need = count * per;
        if bytes.len() < pos + need {
            return Err(Error::Format(format!(
                "raster truncated: need {need} bytes, found {}",
                bytes.len() - pos
            )));
        }
        for px in 0..count {
            let v = if per == 1 {
                bytes[pos + px] as u32
            } else {
                u32::from(bytes[pos + 2 * px]) << 8 | u32::from(bytes[pos + 2 * px + 1])
            };
            if v > maxval {
                return Err(Error::Format(format!("pixel {v} above maxval {maxval}")));
            }
            pixels.push(v as f64 * scale);
        }
    }
    Ok(GrayImage { height, width, pixels })
}

/// Bilinear resize with center-aligned sampling; a constant image stays
/// constant under any target size.
pub fn resize_bilinear(img: &GrayImage, height: usize, width: usize) -> GrayImage {
    if height == img.height && width == img.width {
        return img.clone();
    }
    let sy = img.height as f64 / height as f64;
    let sx = img.width as f64 / width as f64;
    let mut pixels = Vec::with_capacity(height * width);
    for r in 0..height {
        let fy = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let wy = fy - y0 as f64;
        for c in 0..width {
            let fx = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let wx = fx - x0 as f64;
            let top = img.get(y0, x0) * (1.0 - wx) + img.get(y0, x1) * wx;
            let bot = img.get(y1, x0) * (1.0 - wx) + img.get(y1, x1) * wx;
            pixels.push(top * (1.0 - wy) + bot * wy);
        }
    }
    GrayImage { height, width, pixels }
}

/// Reads every `.pgm` file in `dir` (sorted by file name), checks the
/// original sizes agree, optionally resizes to `(height, width)`, and
/// stacks the images as lateral slices.
pub fn ingest_images(dir: &Path, resize: Option<(usize, usize)>) -> Result<Tensor3> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension()
                .map(|e| e.to_string_lossy().eq_ignore_ascii_case("pgm"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Format(format!("no .pgm files in {}", dir.display())));
    }

    let mut images = Vec::with_capacity(files.len());
    let mut original: Option<(usize, usize)> = None;
    for path in &files {
        let bytes = fs::read(path)?;
        let img = parse_pgm(&bytes)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        match original {
            None => original = Some((img.height, img.width)),
            Some(dims) if dims != (img.height, img.width) => {
                return Err(Error::Format(format!(
                    "mixed image sizes: {:?} vs {:?} ({})",
                    dims,
                    (img.height, img.width),
                    path.display()
                )));
            }
            _ => {}
        }
        images.push(img);
    }
    let (h, w) = match resize {
        Some(target) => target,
        None => original.expect("at least one image"),
    };
    if h == 0 || w == 0 {
        return Err(Error::Format("resize target must be positive".into()));
    }
    let resized: Vec<GrayImage> = images.iter().map(|im| resize_bilinear(im, h, w)).collect();

    let n = resized.len();
    Ok(Tensor3::from_fn(h, n, w, |i, j, k| resized[j].get(i, k)))
}
