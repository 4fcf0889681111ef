//! Netpbm graymaps (P2 and P5).
//!
//! Raster row `r` of an `nx x ny` image holds grid line `j = ny - 1 - r`, so
//! the top of the picture is the largest `y`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid_ops::{Field, Grid2D, Mask};

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn fmt_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        offset,
        reason: reason.into(),
    }
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn uint(&mut self, what: &str) -> Result<u32> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.buf.len() && self.buf[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if start == self.buf.len() {
                fmt_err(start, format!("unexpected end of file, expected {what}"))
            } else {
                fmt_err(start, format!("expected {what}"))
            });
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| fmt_err(start, format!("{what} out of range")))
    }
}

/// Header and raw samples of a graymap, in raster order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub samples: Vec<u32>,
}

impl Graymap {
    /// Samples divided by `maxval`, raster order.
    pub fn normalized(&self) -> Vec<f64> {
        let m = f64::from(self.maxval);
        self.samples.iter().map(|&v| f64::from(v) / m).collect()
    }
}

/// Parse a P2 or P5 file of any size. Use [`decode_pgm`] to get a [`Field`].
pub fn parse_pgm(buf: &[u8]) -> Result<Graymap> {
    let binary = match buf.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(fmt_err(0, "not a P2 or P5 graymap")),
    };
    let mut c = Cursor { buf, pos: 2 };
    if c.pos < buf.len() && !buf[c.pos].is_ascii_whitespace() && buf[c.pos] != b'#' {
        return Err(fmt_err(2, "missing whitespace after magic number"));
    }
    c.skip_ws_and_comments();
    let width_at = c.pos;
    let width = c.uint("width")? as usize;
    let height = c.uint("height")? as usize;
    if width == 0 || height == 0 {
        return Err(fmt_err(width_at, "empty image"));
    }
    c.skip_ws_and_comments();
    let max_at = c.pos;
    let maxval = c.uint("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(fmt_err(
            max_at,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let n = width * height;
    let mut samples = Vec::with_capacity(n);
    if binary {
        if c.pos >= buf.len() || !buf[c.pos].is_ascii_whitespace() {
            return Err(fmt_err(
                c.pos,
                "expected a single whitespace before pixel data",
            ));
        }
        c.pos += 1;
        let bytes = if maxval > 255 { 2 } else { 1 };
        let data = &buf[c.pos..];
        if data.len() < n * bytes {
            return Err(fmt_err(
                c.pos + data.len(),
                format!("truncated payload: {} of {} bytes", data.len(), n * bytes),
            ));
        }
        for k in 0..n {
            let at = c.pos + k * bytes;
            let v = if bytes == 2 {
                u32::from(u16::from_be_bytes([data[k * 2], data[k * 2 + 1]]))
            } else {
                u32::from(data[k])
            };
            if v > maxval {
                return Err(fmt_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v);
        }
    } else {
        for _ in 0..n {
            c.skip_ws_and_comments();
            let at = c.pos;
            let v = c.uint("pixel value").map_err(|e| match e {
                Error::Format { offset, reason } if offset == buf.len() => {
                    fmt_err(offset, format!("truncated payload: {reason}"))
                }
                e => e,
            })?;
            if v > maxval {
                return Err(fmt_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v);
        }
    }
    Ok(Graymap {
        width,
        height,
        maxval,
        samples,
    })
}

fn check_dims(r: &Graymap, expected: Option<&Grid2D>) -> Result<Grid2D> {
    match expected {
        Some(g) if (g.nx(), g.ny()) != (r.width, r.height) => Err(fmt_err(
            0,
            format!(
                "image is {}x{}, expected {}x{}",
                r.width,
                r.height,
                g.nx(),
                g.ny()
            ),
        )),
        Some(g) => Ok(*g),
        None => Grid2D::new(r.width, r.height, 1.0 / r.width as f64),
    }
}

/// Decode a graymap into `[0, 1]`. Without `expected` the grid has `h = 1/width`.
pub fn decode_pgm(buf: &[u8], expected: Option<&Grid2D>) -> Result<Field> {
    let r = parse_pgm(buf)?;
    let g = check_dims(&r, expected)?;
    let scale = f64::from(r.maxval);
    let ny = r.height;
    Ok(Field::from_index_fn(g, |i, j| {
        f64::from(r.samples[(ny - 1 - j) * r.width + i]) / scale
    }))
}

pub fn load_pgm(path: impl AsRef<Path>, expected: Option<&Grid2D>) -> Result<Field> {
    decode_pgm(&fs::read(path)?, expected)
}

/// `round(clamp(v, 0, 1) * 255)`, ties away from zero.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Binary P5 with maxval 255.
pub fn encode_pgm(u: &Field) -> Result<Vec<u8>> {
    u.check_finite()?;
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(nx * ny);
    for r in 0..ny {
        let j = ny - 1 - r;
        out.extend((0..nx).map(|i| quantize(u.get(i, j))));
    }
    Ok(out)
}

pub fn save_pgm(path: impl AsRef<Path>, u: &Field) -> Result<()> {
    fs::write(path, encode_pgm(u)?)?;
    Ok(())
}

/// Nonzero pixels are inside the inpainting domain.
pub fn load_mask(path: impl AsRef<Path>, expected: Option<&Grid2D>) -> Result<Mask> {
    let buf = fs::read(path)?;
    let r = parse_pgm(&buf)?;
    let g = check_dims(&r, expected)?;
    let ny = r.height;
    Ok(Mask::from_index_fn(&g, |i, j| {
        r.samples[(ny - 1 - j) * r.width + i] != 0
    }))
}
