//! Output plumbing: atomic writes, input hashing, and small parsers for
//! grids, fields and level pairs.

use std::io::Write;
use std::path::{Path, PathBuf};

use mwtrap::spins::LevelLabel;
use mwtrap::{Error, Result};

/// FNV-1a over the bytes of every input that shaped a run.
pub fn fnv1a64(parts: &[&[u8]]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for part in parts {
        for &b in *part {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}

/// Comment header embedded in every artifact.
pub fn artifact_header(hash: u64, seed: u64) -> String {
    format!("# config_hash={hash:016x} seed={seed}\n")
}

/// Write through a temp file and rename into place.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| Error::Config(format!("create {}: {e}", parent.display())))?;
    }
    let tmp: PathBuf = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| Error::Config(format!("create {}: {e}", tmp.display())))?;
        f.write_all(content.as_bytes())
            .map_err(|e| Error::Config(format!("write {}: {e}", tmp.display())))?;
        f.sync_all().ok();
    }
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Config(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}

/// Parse "lo:hi:step" into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid `{spec}`: expected lo:hi:step")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| Error::Config(format!("grid lo: {e}")))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| Error::Config(format!("grid hi: {e}")))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|e| Error::Config(format!("grid step: {e}")))?;
    if step <= 0.0 || hi < lo {
        return Err(Error::Config(format!("grid `{spec}` is not increasing")));
    }
    let n = ((hi - lo) / step).round() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// Parse a magnetic field with unit suffix: "21.28mT", "0.02128T", "212.8G";
/// bare numbers read as mT.
pub fn parse_field(text: &str) -> Result<f64> {
    let t = text.trim();
    let (value, scale) = if let Some(v) = t.strip_suffix("mT") {
        (v, 1e-3)
    } else if let Some(v) = t.strip_suffix("uT") {
        (v, 1e-6)
    } else if let Some(v) = t.strip_suffix('G') {
        (v, 1e-4)
    } else if let Some(v) = t.strip_suffix('T') {
        (v, 1.0)
    } else {
        (t, 1e-3)
    };
    value
        .trim()
        .parse::<f64>()
        .map(|x| x * scale)
        .map_err(|e| Error::Config(format!("field `{text}`: {e}")))
}

/// Parse a frequency with unit suffix: "1.696GHz", "4.5kHz", "250MHz";
/// bare numbers read as Hz.
pub fn parse_freq(text: &str) -> Result<f64> {
    let t = text.trim();
    let (value, scale) = if let Some(v) = t.strip_suffix("GHz") {
        (v, 1e9)
    } else if let Some(v) = t.strip_suffix("MHz") {
        (v, 1e6)
    } else if let Some(v) = t.strip_suffix("kHz") {
        (v, 1e3)
    } else if let Some(v) = t.strip_suffix("Hz") {
        (v, 1.0)
    } else {
        (t, 1.0)
    };
    value
        .trim()
        .parse::<f64>()
        .map(|x| x * scale)
        .map_err(|e| Error::Config(format!("frequency `{text}`: {e}")))
}

/// Parse a level pair "F,m:F,m", e.g. "3,1:2,1".
pub fn parse_pair(text: &str) -> Result<(LevelLabel, LevelLabel)> {
    let halves: Vec<&str> = text.split(':').collect();
    if halves.len() != 2 {
        return Err(Error::Config(format!("pair `{text}`: expected F,m:F,m")));
    }
    let parse_one = |s: &str| -> Result<LevelLabel> {
        let nums: Vec<&str> = s.split(',').collect();
        if nums.len() != 2 {
            return Err(Error::Config(format!("level `{s}`: expected F,m")));
        }
        Ok(LevelLabel::new(
            nums[0]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("level `{s}`: {e}")))?,
            nums[1]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("level `{s}`: {e}")))?,
        ))
    };
    Ok((parse_one(halves[0])?, parse_one(halves[1])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_units_parse() {
        assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!((parse_field("21.28mT").unwrap() - 21.28e-3).abs() < 1e-12);
        assert!((parse_field("21.28").unwrap() - 21.28e-3).abs() < 1e-12);
        assert!((parse_freq("1.696GHz").unwrap() - 1.696e9).abs() < 1.0);
        let (a, b) = parse_pair("3,1:2,-1").unwrap();
        assert_eq!(a, LevelLabel::new(3, 1));
        assert_eq!(b, LevelLabel::new(2, -1));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(fnv1a64(&[b"abc"]), fnv1a64(&[b"abc"]));
        assert_ne!(fnv1a64(&[b"abc"]), fnv1a64(&[b"abd"]));
    }
}
