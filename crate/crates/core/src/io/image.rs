//! Transmission images: PGM (P2 ASCII or P5 binary) or a delimited matrix.
//!
//! Both need the pixel pitch. In a PGM it is a `# pixel_size_um: 20` comment;
//! an optional `# detuning_MHz: 0` comment gives the probe detuning. Grey
//! levels map to transmission by dividing by maxval.
//!
//! The matrix form is plain text with the same `#` header lines followed by
//! rows of comma- or whitespace-separated transmissions, top row = lowest y.

use std::path::Path;

use crate::constants::mhz_to_rad;
use crate::error::{Error, Result};
use crate::inference::TransmissionImage;

struct Header {
    pixel_um: Option<f64>,
    detuning_mhz: Option<f64>,
}

impl Header {
    fn absorb(&mut self, line: usize, comment: &str) -> Result<()> {
        let Some((k, v)) = comment.split_once(':') else { return Ok(()) };
        let num = || -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(line, format!("bad number in `{}`", comment.trim())))
        };
        match k.trim() {
            "pixel_size_um" => self.pixel_um = Some(num()?),
            "detuning_MHz" => self.detuning_mhz = Some(num()?),
            _ => {}
        }
        Ok(())
    }

    fn finish(self, nx: usize, ny: usize, values: Vec<f64>, default_detuning_mhz: f64) -> Result<TransmissionImage> {
        let pixel = self.pixel_um.ok_or_else(|| Error::parse(0, "missing `# pixel_size_um:` header"))?;
        TransmissionImage::new(
            nx,
            ny,
            pixel * 1e-6,
            mhz_to_rad(self.detuning_mhz.unwrap_or(default_detuning_mhz)),
            values,
        )
        .map_err(|e| Error::parse(0, e.to_string()))
    }
}

/// Reads an image file; the format is chosen from the first bytes.
pub fn read_image(path: &Path, default_detuning_mhz: f64) -> Result<TransmissionImage> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_image(&bytes, default_detuning_mhz).map_err(|e| e.with_path(path))
}

pub fn parse_image(bytes: &[u8], default_detuning_mhz: f64) -> Result<TransmissionImage> {
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        parse_pgm(bytes, default_detuning_mhz)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(0, "image is neither PGM nor UTF-8 text"))?;
        parse_matrix(text, default_detuning_mhz)
    }
}

fn parse_pgm(bytes: &[u8], default_detuning_mhz: f64) -> Result<TransmissionImage> {
    let binary = bytes[1] == b'5';
    let mut header = Header { pixel_um: None, detuning_mhz: None };
    // header tokens: magic, width, height, maxval; comments may sit anywhere between
    let mut tokens: Vec<String> = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    while tokens.len() < 4 {
        if pos >= bytes.len() {
            return Err(Error::parse(line, "truncated PGM header"));
        }
        let c = bytes[pos];
        if c == b'#' {
            let end = bytes[pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |e| pos + e);
            let comment = String::from_utf8_lossy(&bytes[pos + 1..end]).to_string();
            header.absorb(line, &comment)?;
            pos = end;
        } else if c.is_ascii_whitespace() {
            if c == b'\n' {
                line += 1;
            }
            pos += 1;
        } else {
            let end = bytes[pos..].iter().position(|b| b.is_ascii_whitespace() || *b == b'#').map_or(bytes.len(), |e| pos + e);
            tokens.push(String::from_utf8_lossy(&bytes[pos..end]).to_string());
            pos = end;
        }
    }
    let dim = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>().ok().filter(|v| *v > 0).ok_or_else(|| Error::parse(line, format!("bad PGM {what} `{s}`")))
    };
    let nx = dim(&tokens[1], "width")?;
    let ny = dim(&tokens[2], "height")?;
    let maxval = dim(&tokens[3], "maxval")?;
    if maxval > 65535 {
        return Err(Error::parse(line, format!("PGM maxval {maxval} exceeds 65535")));
    }
    let count = nx * ny;
    let raw: Vec<usize> = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = pos + 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let data = bytes.get(start..).unwrap_or(&[]);
        if data.len() < count * width {
            return Err(Error::parse(line, format!("PGM raster holds {} bytes, need {}", data.len(), count * width)));
        }
        if width == 1 {
            data[..count].iter().map(|&b| b as usize).collect()
        } else {
            data[..2 * count].chunks(2).map(|c| ((c[0] as usize) << 8) | c[1] as usize).collect()
        }
    } else {
        let text = String::from_utf8_lossy(&bytes[pos..]);
        let mut out = Vec::with_capacity(count);
        for (k, l) in text.lines().enumerate() {
            let l = l.split('#').next().unwrap_or("");
            for tok in l.split_whitespace() {
                let v = tok
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line + k, format!("bad PGM sample `{tok}`")))?;
                out.push(v);
            }
        }
        if out.len() != count {
            return Err(Error::parse(line, format!("PGM has {} samples, need {count}", out.len())));
        }
        out
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(Error::parse(line, format!("PGM sample {v} exceeds maxval {maxval}")));
    }
    let values = raw.into_iter().map(|v| v as f64 / maxval as f64).collect();
    header.finish(nx, ny, values, default_detuning_mhz)
}

fn parse_matrix(text: &str, default_detuning_mhz: f64) -> Result<TransmissionImage> {
    let mut header = Header { pixel_um: None, detuning_mhz: None };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if let Some(c) = t.strip_prefix('#') {
            header.absorb(line, c)?;
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let row = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(line, format!("not a finite number: `{s}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(line, format!("row has {} columns, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(0, "image matrix has no rows"));
    }
    let (nx, ny) = (rows[0].len(), rows.len());
    header.finish(nx, ny, rows.concat(), default_detuning_mhz)
}

/// Writes a 16-bit binary PGM with the pixel-size and detuning comments.
pub fn format_pgm(image: &TransmissionImage) -> Vec<u8> {
    let mut out = format!(
        "P5\n# pixel_size_um: {:?}\n# detuning_MHz: {:?}\n{} {}\n65535\n",
        image.pixel_size * 1e6,
        crate::constants::rad_to_mhz(image.probe_detuning),
        image.nx,
        image.ny
    )
    .into_bytes();
    for v in &image.values {
        let g = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&g.to_be_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_pgm_with_comments() {
        let text = "P2\n# pixel_size_um: 20\n3 2\n# detuning_MHz: 1.5\n10\n0 5 10\n10 5 0\n";
        let img = parse_image(text.as_bytes(), 0.0).unwrap();
        assert_eq!((img.nx, img.ny), (3, 2));
        assert!((img.pixel_size - 20e-6).abs() < 1e-18);
        assert_eq!(img.values, vec![0.0, 0.5, 1.0, 1.0, 0.5, 0.0]);
        assert!((img.probe_detuning - mhz_to_rad(1.5)).abs() < 1e-6);
    }

    #[test]
    fn binary_pgm_round_trip() {
        let values: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let img = TransmissionImage::new(4, 3, 12e-6, 0.0, values.clone()).unwrap();
        let back = parse_image(&format_pgm(&img), 0.0).unwrap();
        assert_eq!((back.nx, back.ny), (4, 3));
        for (a, b) in back.values.iter().zip(&values) {
            assert!((a - b).abs() < 1.0 / 65535.0);
        }
    }

    #[test]
    fn matrix_needs_pixel_size_and_rectangular_rows() {
        assert!(matches!(parse_image(b"1,2\n3,4\n", 0.0), Err(Error::Parse { .. })));
        let ragged = "# pixel_size_um: 5\n1 2\n3\n";
        assert!(matches!(parse_image(ragged.as_bytes(), 0.0), Err(Error::Parse { line: 3, .. })));
        let ok = parse_image(b"# pixel_size_um: 5\n0.1, 0.2\n0.3, 0.4\n", 0.0).unwrap();
        assert_eq!(ok.get(1, 1), 0.4);
    }
}
