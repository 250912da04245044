//! File formats: far field operator files (`ffo-v1`), operator bank
//! manifests, and CSV/PGM exporters for results.
//!
//! An `ffo-v1` file is line oriented:
//!
//! ```text
//! format ffo-v1
//! k 6.283185307179586
//! n_directions 32
//! convention farfield=volume-kernel gamma_sq=1/(8*pi*k) weight=2*pi/N
//! contrast {"type":"constant_on_square","value":0.4,...}
//! entries
//! <re> <im>            (n² lines, row-major)
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same
//! binary64 value, so a write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inversion_bounds::{
    Annulus, BoundsResult, ConstantBank, LinearContrast, Orientation, TraceBounds,
};
use crate::inversion_fm::IndicatorMap;
use crate::linalg::CMat;
use crate::model::{ContrastField, DirectionSet, WaveContext};
use crate::operators::FarFieldMatrix;
use crate::spectral::OperatorSpectrum;

pub const FFO_FORMAT: &str = "ffo-v1";
pub const CONVENTION_FARFIELD: &str = "volume-kernel";
pub const CONVENTION_GAMMA_SQ: &str = "1/(8*pi*k)";
pub const CONVENTION_WEIGHT: &str = "2*pi/N";
pub const MANIFEST_NAME: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "bank-v1";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ffo_to_string(f: &FarFieldMatrix) -> Result<String> {
    let mut s = String::new();
    let contrast = match &f.contrast_tag {
        Some(q) => serde_json::to_string(q)?,
        None => "none".to_string(),
    };
    let _ = writeln!(s, "format {FFO_FORMAT}");
    let _ = writeln!(s, "k {}", f.ctx.k());
    let _ = writeln!(s, "n_directions {}", f.n());
    let _ = writeln!(
        s,
        "convention farfield={CONVENTION_FARFIELD} gamma_sq={CONVENTION_GAMMA_SQ} weight={CONVENTION_WEIGHT}"
    );
    let _ = writeln!(s, "contrast {contrast}");
    let _ = writeln!(s, "entries");
    for i in 0..f.n() {
        for j in 0..f.n() {
            let v = f.kernel[(i, j)];
            let _ = writeln!(s, "{:?} {:?}", v.re, v.im);
        }
    }
    Ok(s)
}

pub fn ffo_write(path: &Path, f: &FarFieldMatrix) -> Result<()> {
    write_text(path, &ffo_to_string(f)?)
}

pub fn ffo_read(path: &Path) -> Result<FarFieldMatrix> {
    ffo_from_str(&read_text(path)?, &path.display().to_string())
}

/// Parses an `ffo-v1` document; `file` names it in error messages.
pub fn ffo_from_str(text: &str, file: &str) -> Result<FarFieldMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        file: file.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (no, line) = lines.next().ok_or_else(|| err(0, format!("missing `{key}` line")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((no, v.trim().to_string())),
            _ if line == key => Ok((no, String::new())),
            _ => Err(err(no, format!("expected `{key}`, found {line:?}"))),
        }
    };
    let (no, format) = header("format")?;
    if format != FFO_FORMAT {
        return Err(err(no, format!("unsupported format {format:?}")));
    }
    let (no, k) = header("k")?;
    let k: f64 = k.parse().map_err(|e| err(no, format!("k: {e}")))?;
    let ctx = WaveContext::new(k).map_err(|e| err(no, e.to_string()))?;
    let (no, n) = header("n_directions")?;
    let n: usize = n.parse().map_err(|e| err(no, format!("n_directions: {e}")))?;
    let dirs = DirectionSet::new(n).map_err(|e| err(no, e.to_string()))?;
    let (no, convention) = header("convention")?;
    let mut seen = [false; 3];
    for field in convention.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(no, format!("malformed convention field {field:?}")))?;
        let (slot, expected) = match key {
            "farfield" => (0, CONVENTION_FARFIELD),
            "gamma_sq" => (1, CONVENTION_GAMMA_SQ),
            "weight" => (2, CONVENTION_WEIGHT),
            other => return Err(err(no, format!("unknown convention field {other:?}"))),
        };
        if value != expected {
            return Err(Error::ConventionMismatch(format!(
                "{file}: {key} = {value:?}, expected {expected:?}"
            )));
        }
        seen[slot] = true;
    }
    if seen.contains(&false) {
        return Err(err(no, "convention block must name farfield, gamma_sq and weight".into()));
    }
    let (no, contrast) = header("contrast")?;
    let contrast_tag = if contrast == "none" {
        None
    } else {
        Some(serde_json::from_str::<ContrastField>(&contrast).map_err(|e| err(no, format!("contrast: {e}")))?)
    };
    header("entries")?;
    let mut values = Vec::with_capacity(n * n);
    for (no, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut num = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| err(no, format!("missing {what} part")))?
                .parse::<f64>()
                .map_err(|e| err(no, format!("{what} part: {e}")))
        };
        let re = num("real")?;
        let im = num("imaginary")?;
        if parts.next().is_some() {
            return Err(err(no, "expected exactly two numbers".into()));
        }
        if values.len() == n * n {
            return Err(err(no, format!("more than {} entries", n * n)));
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != n * n {
        return Err(err(0, format!("expected {} entries, found {}", n * n, values.len())));
    }
    let kernel = CMat::from_fn(n, n, |i, j| values[i * n + j]);
    Ok(FarFieldMatrix::new(ctx, dirs, kernel, contrast_tag))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub contrast: ContrastField,
    pub file: String,
    pub sha256: String,
}

/// Index of a directory of `ffo-v1` files with checksums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankManifest {
    pub format: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    pub directory: PathBuf,
}

impl BankManifest {
    /// Writes every operator as `<stem>.ffo` and a manifest into `dir`.
    pub fn write(dir: &Path, operators: &[(String, FarFieldMatrix)]) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = Vec::with_capacity(operators.len());
        for (stem, f) in operators {
            let contrast = f
                .contrast_tag
                .clone()
                .ok_or_else(|| Error::Precondition(format!("bank operator {stem} has no contrast descriptor")))?;
            let file = format!("{stem}.ffo");
            let text = ffo_to_string(f)?;
            write_text(&dir.join(&file), &text)?;
            entries.push(ManifestEntry {
                contrast,
                file,
                sha256: sha256_hex(text.as_bytes()),
            });
        }
        let manifest = BankManifest {
            format: MANIFEST_FORMAT.to_string(),
            entries,
            directory: dir.to_path_buf(),
        };
        write_text(&dir.join(MANIFEST_NAME), &serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let mut manifest: BankManifest = serde_json::from_str(&read_text(&path)?)?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(Error::Parse {
                file: path.display().to_string(),
                line: 0,
                message: format!("unsupported manifest format {:?}", manifest.format),
            });
        }
        manifest.directory = dir.to_path_buf();
        Ok(manifest)
    }

    /// Loads every operator, verifying checksums and descriptors.
    pub fn load_all(&self) -> Result<Vec<FarFieldMatrix>> {
        self.entries
            .iter()
            .map(|e| {
                let path = self.directory.join(&e.file);
                let text = read_text(&path)?;
                if sha256_hex(text.as_bytes()) != e.sha256 {
                    return Err(Error::Checksum(path));
                }
                let f = ffo_from_str(&text, &path.display().to_string())?;
                if f.contrast_tag.as_ref() != Some(&e.contrast) {
                    return Err(Error::Parse {
                        file: path.display().to_string(),
                        line: 5,
                        message: "contrast descriptor differs from the manifest".into(),
                    });
                }
                Ok(f)
            })
            .collect()
    }
}

/// File stem for a constant test contrast, e.g. `const_+0.400000`.
pub fn constant_stem(c: f64) -> String {
    format!("const_{c:+.6}")
}

/// Writes a constant bank as a manifest directory.
pub fn write_constant_bank(dir: &Path, bank: &ConstantBank) -> Result<BankManifest> {
    let ops: Vec<(String, FarFieldMatrix)> = bank
        .entries()
        .iter()
        .map(|(c, f)| (constant_stem(*c), f.clone()))
        .collect();
    BankManifest::write(dir, &ops)
}

/// Loads a bank of `constant_on_square` operators.
pub fn read_constant_bank(dir: &Path) -> Result<ConstantBank> {
    let manifest = BankManifest::read(dir)?;
    let ops = manifest.load_all()?;
    let entries = manifest
        .entries
        .iter()
        .zip(ops)
        .map(|(e, f)| match e.contrast {
            ContrastField::ConstantOnSquare { value, .. } => Ok((value, f)),
            _ => Err(Error::Precondition(format!("{} is not a constant test contrast", e.file))),
        })
        .collect::<Result<_>>()?;
    Ok(ConstantBank::new(entries))
}

pub fn write_linear_bank(dir: &Path, bank: &[(LinearContrast, FarFieldMatrix)]) -> Result<BankManifest> {
    let ops: Vec<(String, FarFieldMatrix)> = bank
        .iter()
        .enumerate()
        .map(|(i, (_, f))| (format!("linear_{i:05}"), f.clone()))
        .collect();
    BankManifest::write(dir, &ops)
}

/// Loads a bank of `linear_on_square` operators in manifest order.
pub fn read_linear_bank(dir: &Path) -> Result<Vec<(LinearContrast, FarFieldMatrix)>> {
    let manifest = BankManifest::read(dir)?;
    let ops = manifest.load_all()?;
    manifest
        .entries
        .iter()
        .zip(ops)
        .map(|(e, f)| match e.contrast {
            ContrastField::LinearOnSquare {
                anchor,
                slope,
                offset,
                half_width,
            } => Ok((
                LinearContrast {
                    anchor,
                    slope,
                    offset,
                    half_width,
                },
                f,
            )),
            _ => Err(Error::Precondition(format!("{} is not a linear test contrast", e.file))),
        })
        .collect()
}

fn provenance_header(orientation: Orientation, annulus: Annulus) -> String {
    format!(
        "# orientation={orientation} r_min={:?} r_max={:?}\n",
        annulus.r_min, annulus.r_max
    )
}

/// Columns: `c,m_plus,m_minus,verdict`, preceded by a `#` line with the
/// orientation, annulus and bounds.
pub fn bounds_csv(r: &BoundsResult) -> String {
    let mut s = provenance_header(r.orientation, r.annulus);
    let _ = writeln!(s, "# c_lo={:?} c_hi={:?}", r.c_star, r.c_upper);
    s.push_str("c,m_plus,m_minus,verdict\n");
    for e in &r.trail {
        let _ = writeln!(s, "{:?},{},{},{}", e.c, e.counts.m_plus, e.counts.m_minus, e.verdict);
    }
    s
}

/// Columns: `s_arclength,x,y,q_minus,q_plus`.
pub fn trace_csv(t: &TraceBounds) -> String {
    let mut s = provenance_header(t.orientation, t.annulus);
    s.push_str("s_arclength,x,y,q_minus,q_plus\n");
    for ((b, lo), hi) in t.boundary_samples.iter().zip(&t.q_minus).zip(&t.q_plus) {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?},{:?}", b.s, b.point[0], b.point[1], lo, hi);
    }
    s
}

/// Columns: `x,y,value`, row-major in the sampling grid.
pub fn indicator_csv(map: &IndicatorMap) -> String {
    let mut s = format!("# alpha={:?} resolution={}\n", map.alpha, map.grid.resolution);
    s.push_str("x,y,value\n");
    for (i, v) in map.values.iter().enumerate() {
        let p = map.grid.point(i);
        let _ = writeln!(s, "{:?},{:?},{:?}", p[0], p[1], v);
    }
    s
}

/// Binary 8-bit PGM (`P5`); value `v` maps to `round(255·v)` and the first
/// image row is the largest `y`.
pub fn indicator_pgm(map: &IndicatorMap) -> Vec<u8> {
    let r = map.grid.resolution;
    let mut out = format!("P5\n{r} {r}\n255\n").into_bytes();
    for iy in (0..r).rev() {
        for ix in 0..r {
            let v = map.values[iy * r + ix].clamp(0.0, 1.0);
            out.push((255.0 * v).round() as u8);
        }
    }
    out
}

/// Columns: `index,re,im,abs,residual`.
pub fn spectrum_csv(spec: &OperatorSpectrum) -> String {
    let mut s = String::from("index,re,im,abs,residual\n");
    for (i, (l, r)) in spec.eigenvalues.iter().zip(&spec.residuals).enumerate() {
        let _ = writeln!(s, "{i},{:?},{:?},{:?},{:?}", l.re, l.im, l.norm(), r);
    }
    s
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a JSON contrast descriptor.
pub fn read_contrast(path: &Path) -> Result<ContrastField> {
    let q: ContrastField = serde_json::from_str(&read_text(path)?)?;
    q.validate()?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_ffm(n: usize, seed: u64) -> FarFieldMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernel = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0) * 1e-3, rng.gen::<f64>() / 3.0)
        });
        FarFieldMatrix::new(
            WaveContext::new(2.0 * PI).unwrap(),
            DirectionSet::new(n).unwrap(),
            kernel,
            Some(ContrastField::paper_qc()),
        )
    }

    #[test]
    fn ffo_roundtrip_is_bit_exact() {
        let f = random_ffm(8, 3);
        let g = ffo_from_str(&ffo_to_string(&f).unwrap(), "mem").unwrap();
        assert_eq!(f.ctx.k().to_bits(), g.ctx.k().to_bits());
        for (a, b) in f.kernel.iter().zip(g.kernel.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(f.contrast_tag, g.contrast_tag);
    }

    #[test]
    fn weight_convention_mismatch_is_reported() {
        let text = ffo_to_string(&random_ffm(8, 1)).unwrap().replace("weight=2*pi/N", "weight=1/N");
        assert!(matches!(ffo_from_str(&text, "mem"), Err(Error::ConventionMismatch(_))));
    }

    #[test]
    fn malformed_entry_names_its_line() {
        let text = ffo_to_string(&random_ffm(8, 2)).unwrap().replacen("\n0.", "\nzero.", 1);
        match ffo_from_str(&text, "mem") {
            Err(Error::Parse { line, .. }) => assert!(line > 6),
            other => panic!("unexpected {other:?}"),
        }
        let short: String = ffo_to_string(&random_ffm(8, 2)).unwrap().lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(ffo_from_str(&short, "mem"), Err(Error::Parse { .. })));
    }

    #[test]
    fn manifest_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let f = random_ffm(8, 4);
        let manifest = BankManifest::write(dir.path(), &[("a".into(), f.clone())]).unwrap();
        let back = BankManifest::read(dir.path()).unwrap().load_all().unwrap();
        assert_eq!(back[0].kernel, f.kernel);
        let path = dir.path().join(&manifest.entries[0].file);
        let text = fs::read_to_string(&path).unwrap().replacen("entries\n", "entries\n\n", 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(
            BankManifest::read(dir.path()).unwrap().load_all(),
            Err(Error::Checksum(_))
        ));
    }

    #[test]
    fn pgm_maps_values_exactly() {
        use crate::inversion_fm::SamplingGrid;
        use crate::model::Rect;
        let grid = SamplingGrid::new(Rect::square([0.0, 0.0], 1.0), 2).unwrap();
        let map = IndicatorMap::from_raw(grid, vec![0.0, 0.5, 0.25, 1.0], 1e-8).unwrap();
        let pgm = indicator_pgm(&map);
        assert!(pgm.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&pgm[pgm.len() - 4..], &[64, 255, 0, 128]);
    }
}
