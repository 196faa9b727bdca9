//! Portable graymap (PGM) reading and writing, plain (`P2`) and raw (`P5`),
//! 8-bit only.

use std::path::Path;

use super::IngestError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Row-major pixels; `pixels.len()` must equal `width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, IngestError> {
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(IngestError::Image(format!(
                "{} pixels do not fill a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Sub-image with top-left corner `(x, y)`; clipped to the image bounds.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> GrayImage {
        let x_end = (x + width).min(self.width);
        let y_end = (y + height).min(self.height);
        let x = x.min(x_end);
        let y = y.min(y_end);
        let mut pixels = Vec::with_capacity((x_end - x) * (y_end - y));
        for row in y..y_end {
            pixels.extend_from_slice(&self.pixels[row * self.width + x..row * self.width + x_end]);
        }
        GrayImage {
            width: x_end - x,
            height: y_end - y,
            pixels,
        }
    }

    /// Raw (`P5`) encoding with maxval 255.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, IngestError> {
        let mut cursor = Cursor { bytes, pos: 0 };
        let magic = cursor.token()?;
        let raw = match magic {
            b"P5" => true,
            b"P2" => false,
            other => {
                return Err(IngestError::Image(format!(
                    "unsupported magic '{}'",
                    String::from_utf8_lossy(other)
                )))
            }
        };
        let width = cursor.number("width")?;
        let height = cursor.number("height")?;
        let maxval = cursor.number("maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(IngestError::Image(format!(
                "maxval {maxval} not supported (8-bit graymaps only)"
            )));
        }
        let count = width
            .checked_mul(height)
            .ok_or_else(|| IngestError::Image("image too large".into()))?;

        let pixels = if raw {
            // exactly one whitespace byte separates the header from the raster
            let start = cursor.pos + 1;
            let data = bytes
                .get(start..start + count)
                .ok_or_else(|| IngestError::Image("truncated raster".into()))?;
            data.to_vec()
        } else {
            (0..count)
                .map(|_| cursor.number("pixel"))
                .map(|v| {
                    v.and_then(|v| {
                        u8::try_from(v)
                            .map_err(|_| IngestError::Image(format!("pixel {v} exceeds 255")))
                    })
                })
                .collect::<Result<Vec<u8>, _>>()?
        };
        if let Some(bad) = pixels.iter().find(|&&p| p as usize > maxval) {
            return Err(IngestError::Image(format!(
                "pixel {bad} exceeds maxval {maxval}"
            )));
        }
        GrayImage::new(width, height, pixels)
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayImage, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::io(path, e))?;
    GrayImage::parse(&bytes).map_err(|e| e.context(path.display().to_string()))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8], IngestError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(IngestError::Image("unexpected end of data".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, IngestError> {
        let token = self.token()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                IngestError::Image(format!("bad {what}: '{}'", String::from_utf8_lossy(token)))
            })
    }
}
