//! RGBA rasters, alpha blending and binary PPM/PGM files.

use super::PlaybackError;
use crate::geometry::{GeometryError, PictureDims, Rect2D};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    /// Row-major RGBA, 4 bytes per pixel.
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, PlaybackError> {
        let expected = 4 * width as usize * height as usize;
        if pixels.len() != expected {
            return Err(PlaybackError::RasterSize {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgba: [u8; 4]) -> Self {
        Self {
            width,
            height,
            pixels: rgba.repeat(width as usize * height as usize),
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 4].try_into().unwrap()
    }

    fn set(&mut self, x: u32, y: u32, rgba: [u8; 4]) {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 4].copy_from_slice(&rgba);
    }
}

/// One overlay to blend. The raster is scaled to `placement` with
/// nearest-neighbour sampling when the sizes differ.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub raster: Raster,
    pub opacity: f64,
    pub placement: Rect2D,
    pub use_alpha: bool,
}

/// Blends `layers` over `background` in list order. Per pixel
/// `a = opacity * (alpha / 255 if use_alpha else 1)` and every channel,
/// alpha included, becomes `a * src + (1 - a) * dst` rounded half away from
/// zero.
pub fn compose(background: &Raster, layers: &[Layer]) -> Result<Raster, PlaybackError> {
    let dims = PictureDims {
        width: background.width,
        height: background.height,
    };
    for l in layers {
        if !l.placement.fits_within(dims) {
            return Err(GeometryError::RectOutOfBounds {
                rect: l.placement,
                width: dims.width,
                height: dims.height,
            }
            .into());
        }
    }
    let mut out = background.clone();
    for l in layers {
        let p = l.placement;
        let (sw, sh) = (u64::from(l.raster.width), u64::from(l.raster.height));
        if sw == 0 || sh == 0 {
            continue;
        }
        for dy in 0..p.height {
            let sy = (u64::from(dy) * sh / u64::from(p.height)) as u32;
            for dx in 0..p.width {
                let sx = (u64::from(dx) * sw / u64::from(p.width)) as u32;
                let src = l.raster.pixel(sx, sy);
                let a = if l.use_alpha {
                    l.opacity * f64::from(src[3]) / 255.0
                } else {
                    l.opacity
                };
                let (x, y) = (p.x + dx, p.y + dy);
                let dst = out.pixel(x, y);
                let mut px = [0u8; 4];
                for c in 0..4 {
                    px[c] = blend(src[c], dst[c], a);
                }
                out.set(x, y, px);
            }
        }
    }
    Ok(out)
}

fn blend(src: u8, dst: u8, a: f64) -> u8 {
    let v = a * f64::from(src) + (1.0 - a) * f64::from(dst);
    // non-negative, so round() is half away from zero
    v.round().clamp(0.0, 255.0) as u8
}

/// Binary PPM (P6) holding the RGB channels.
pub fn write_ppm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", r.width, r.height).into_bytes();
    for px in r.pixels.chunks_exact(4) {
        out.extend_from_slice(&px[..3]);
    }
    out
}

/// Binary PGM (P5) holding the alpha channel.
pub fn write_pgm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.extend(r.pixels.chunks_exact(4).map(|px| px[3]));
    out
}

/// Reads a P6 image, taking alpha from an optional P5 sidecar of the same
/// size (opaque otherwise).
pub fn read_ppm(ppm: &[u8], alpha: Option<&[u8]>) -> Result<Raster, PlaybackError> {
    let (w, h, rgb) = read_pnm(ppm, b"P6", 3)?;
    let a = match alpha {
        Some(bytes) => {
            let (aw, ah, a) = read_pnm(bytes, b"P5", 1)?;
            if (aw, ah) != (w, h) {
                return Err(PlaybackError::Pnm(format!(
                    "alpha plane is {aw}x{ah}, image is {w}x{h}"
                )));
            }
            Some(a)
        }
        None => None,
    };
    let mut pixels = Vec::with_capacity(4 * w as usize * h as usize);
    for (i, px) in rgb.chunks_exact(3).enumerate() {
        pixels.extend_from_slice(px);
        pixels.push(a.map_or(255, |a| a[i]));
    }
    Raster::new(w, h, pixels)
}

/// Reads a P5 image as a grey raster (R = G = B = value, opaque).
pub fn read_pgm(pgm: &[u8]) -> Result<Raster, PlaybackError> {
    let (w, h, g) = read_pnm(pgm, b"P5", 1)?;
    Raster::new(w, h, g.iter().flat_map(|&v| [v, v, v, 255]).collect())
}

fn read_pnm<'a>(bytes: &'a [u8], magic: &[u8], channels: usize) -> Result<(u32, u32, &'a [u8]), PlaybackError> {
    let err = |m: &str| PlaybackError::Pnm(m.to_string());
    if !bytes.starts_with(magic) {
        return Err(err(&format!("expected {} header", String::from_utf8_lossy(magic))));
    }
    let mut pos = magic.len();
    let mut fields = [0u32; 3];
    for f in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *f = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("bad header number"))?;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(err("only 8-bit images (maxval 255) are supported"));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(err("missing whitespace after header"));
    }
    pos += 1;
    let len = channels * w as usize * h as usize;
    let data = &bytes[pos..];
    if data.len() < len {
        return Err(err(&format!("expected {len} data bytes, found {}", data.len())));
    }
    Ok((w, h, &data[..len]))
}
