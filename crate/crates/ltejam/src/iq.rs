//! IQ sample files: interleaved float32, little-endian, I then Q.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Result, SimError};

/// Streams samples out as interleaved little-endian float32 pairs.
pub fn write_iq(mut w: impl Write, samples: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a whole interleaved float32 stream back into complex samples.
pub fn read_iq(mut r: impl Read) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(SimError::Framing(format!(
            "{} bytes is not a whole number of float32 I/Q pairs",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

pub fn write_iq_file(path: &Path, samples: &[Complex64]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_iq(std::io::BufWriter::new(file), samples)
}

pub fn read_iq_file(path: &Path) -> Result<Vec<Complex64>> {
    let file = std::fs::File::open(path)?;
    read_iq(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_samples_at_float32_precision() {
        let samples: Vec<Complex64> = (0..1000)
            .map(|i| {
                let t = i as f64 * 0.013;
                Complex64::new(t.sin() * 1.5, t.cos() - 0.25)
            })
            .collect();
        let mut buf = Vec::new();
        write_iq(&mut buf, &samples).unwrap();
        assert_eq!(buf.len(), 8000);
        let back = read_iq(buf.as_slice()).unwrap();
        assert_eq!(back.len(), samples.len());
        for (a, b) in samples.iter().zip(&back) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn layout_is_interleaved_little_endian() {
        let mut buf = Vec::new();
        write_iq(&mut buf, &[Complex64::new(1.0, -2.0)]).unwrap();
        assert_eq!(&buf[0..4], &1.0f32.to_le_bytes());
        assert_eq!(&buf[4..8], &(-2.0f32).to_le_bytes());
    }

    #[test]
    fn truncated_files_are_rejected() {
        let bytes = [0u8; 12];
        assert!(read_iq(&bytes[..]).is_err());
        let empty: [u8; 0] = [];
        assert_eq!(read_iq(&empty[..]).unwrap().len(), 0);
    }
}
