//! Binary snapshots: `VXLSNAP1`, `u32 × 3` dims, `f64 × 3` side lengths,
//! `f64` time, then row-major `(f32 re, f32 im)` pairs, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EvolveError, Observable};
use crate::grid::{BoxSpec, ComplexField};

const MAGIC: &[u8; 8] = b"VXLSNAP1";

/// JSON sidecar written next to each snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format: String,
    pub dtype: String,
    pub dims: [usize; 3],
    pub length: [f64; 3],
    pub t: f64,
    #[serde(default)]
    pub config: serde_json::Value,
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Writes `field` to `path` and its metadata to `path.json`.
pub fn write_snapshot(path: &Path, field: &ComplexField, config: serde_json::Value) -> Result<(), EvolveError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    for &n in &field.spec.n {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in &field.spec.length {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&field.t.to_le_bytes())?;
    for z in field.data.iter() {
        w.write_all(&(z.re as f32).to_le_bytes())?;
        w.write_all(&(z.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    let meta = SnapshotMeta {
        format: "VXLSNAP1".into(),
        dtype: "complex64".into(),
        dims: field.spec.n,
        length: field.spec.length,
        t: field.t,
        config,
    };
    std::fs::write(sidecar(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<ComplexField, EvolveError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(EvolveError::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    let mut n = [0usize; 3];
    for v in &mut n {
        r.read_exact(&mut b4)?;
        *v = u32::from_le_bytes(b4) as usize;
    }
    let mut length = [0.0; 3];
    for v in &mut length {
        r.read_exact(&mut b8)?;
        *v = f64::from_le_bytes(b8);
    }
    r.read_exact(&mut b8)?;
    let t = f64::from_le_bytes(b8);
    let spec = BoxSpec::new(length, n, true)?;
    let mut raw = vec![0u8; spec.len() * 8];
    r.read_exact(&mut raw)?;
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(EvolveError::Format("trailing bytes".into()));
    }
    let vals: Vec<Complex64> = raw
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    let data = Array3::from_shape_vec((n[0], n[1], n[2]), vals)
        .map_err(|e| EvolveError::Format(e.to_string()))?;
    Ok(ComplexField { spec, t, data })
}

/// `t,mass,gl_energy` rows.
pub fn write_observables_csv(path: &Path, obs: &[Observable]) -> Result<(), EvolveError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,mass,gl_energy")?;
    for o in obs {
        writeln!(w, "{},{},{}", o.t, o.mass, o.gl_energy)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_at_single_precision() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        let spec = BoxSpec::new([2.0, 3.0, 4.0], [16, 16, 32], true).unwrap();
        let mut f = ComplexField::from_fn(spec, 0.0, |x| Complex64::new(x[0], x[1] * x[2]));
        f.t = 0.125;
        write_snapshot(&p, &f, serde_json::json!({"kappa": 1.0})).unwrap();
        let g = read_snapshot(&p).unwrap();
        assert_eq!((g.spec, g.t), (f.spec, f.t));
        assert!(g.max_abs_diff(&f) < 1e-6);
        let meta: SnapshotMeta = serde_json::from_str(&std::fs::read_to_string(sidecar(&p)).unwrap()).unwrap();
        assert_eq!(meta.dims, [16, 16, 32]);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 8 + 12 + 32 + (16 * 16 * 32 * 8) as u64);
        std::fs::write(&p, b"NOTASNAP").unwrap();
        assert!(read_snapshot(&p).is_err());
    }
}
