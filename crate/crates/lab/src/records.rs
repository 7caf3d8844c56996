//! On-disk mode records: JSON metadata next to a whitespace-separated vector
//! file with one row per degree of freedom (`u f` or `u f f_analytic`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use stadium_core::eigensolve::{Eigenpair, SpectralWindow};
use stadium_core::operators::{FieldVector, OperatorPair};
use stadium_core::quasimode::{ModeField, Provenance, QuasimodeSpec};
use stadium_core::{Domain, TriMesh};

/// Enough to rebuild the mesh bit-identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub domain: Domain,
    pub h: f64,
    pub refinements: u32,
}

impl MeshSpec {
    pub fn build(&self) -> anyhow::Result<(TriMesh, OperatorPair)> {
        let mesh = TriMesh::build_refined(self.domain, self.h, self.refinements)?;
        let op = OperatorPair::assemble(&mesh)?;
        Ok((mesh, op))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub mesh: MeshSpec,
    pub lambda: f64,
    pub lambdasq: f64,
    pub residual_bound: Option<f64>,
    pub f_norm: f64,
    pub f_norm_analytic: Option<f64>,
    pub provenance: Provenance,
    pub parity: Option<(i8, i8)>,
    pub window: Option<SpectralWindow>,
    pub quasimode: Option<QuasimodeSpec>,
    /// Relative to the directory holding the record.
    pub vector_file: String,
}

impl ModeRecord {
    pub fn from_mode(mesh: MeshSpec, mode: &ModeField, vector_file: String) -> ModeRecord {
        ModeRecord {
            mesh,
            lambda: mode.lambda,
            lambdasq: mode.lambdasq(),
            residual_bound: None,
            f_norm: mode.f_norm,
            f_norm_analytic: mode.f_norm_analytic,
            provenance: mode.provenance,
            parity: None,
            window: None,
            quasimode: None,
            vector_file,
        }
    }

    pub fn with_eigenpair(mut self, pair: &Eigenpair) -> ModeRecord {
        self.residual_bound = Some(pair.residual_bound);
        self.parity = pair.parity;
        self.window = Some(pair.window);
        self
    }
}

fn vectors_text(mode: &ModeField) -> String {
    let mut s = String::new();
    for i in 0..mode.vector.len() {
        let _ = write!(s, "{:e} {:e}", mode.vector.0[i], mode.residual.0[i]);
        if let Some(a) = &mode.analytic_residual {
            let _ = write!(s, " {:e}", a.0[i]);
        }
        s.push('\n');
    }
    s
}

/// Writes `<stem>.json` and `<stem>.vec` into `dir`; returns the JSON path.
pub fn save_mode(dir: &Path, stem: &str, record: &ModeRecord, mode: &ModeField) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let vec_path = dir.join(&record.vector_file);
    std::fs::write(&vec_path, vectors_text(mode)).with_context(|| format!("writing {}", vec_path.display()))?;
    let json_path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(record)?;
    std::fs::write(&json_path, json + "\n").with_context(|| format!("writing {}", json_path.display()))?;
    Ok(json_path)
}

/// Reads a record and its vectors, checking the dof count against `op`.
pub fn load_mode(path: &Path, op: &OperatorPair) -> anyhow::Result<(ModeRecord, ModeField)> {
    let record = read_record(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let vec_path = dir.join(&record.vector_file);
    let text = std::fs::read_to_string(&vec_path).with_context(|| format!("reading {}", vec_path.display()))?;
    let n = op.num_dofs();
    let mut u = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut fa = Vec::new();
    for (k, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("{}:{}", vec_path.display(), k + 1))?;
        match vals.as_slice() {
            [a, b] => {
                u.push(*a);
                f.push(*b);
            }
            [a, b, c] => {
                u.push(*a);
                f.push(*b);
                fa.push(*c);
            }
            _ => bail!("{}:{}: expected 2 or 3 columns", vec_path.display(), k + 1),
        }
    }
    if u.len() != n || (!fa.is_empty() && fa.len() != n) {
        bail!("{} holds {} values but the mesh has {n} dofs", vec_path.display(), u.len());
    }
    let mode = ModeField {
        vector: FieldVector(u),
        lambda: record.lambda,
        residual: FieldVector(f),
        f_norm: record.f_norm,
        analytic_residual: (!fa.is_empty()).then_some(FieldVector(fa)),
        f_norm_analytic: record.f_norm_analytic,
        provenance: record.provenance,
    };
    Ok((record, mode))
}

pub fn read_record(path: &Path) -> anyhow::Result<ModeRecord> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stadium_core::quasimode::{explicit_quasimode, Profile};

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = MeshSpec { domain: Domain::Stadium { alpha: 1.0, beta: 1.0 }, h: 0.05, refinements: 0 };
        let (mesh, op) = spec.build().unwrap();
        let q = QuasimodeSpec::new(1, -0.5, 0.5, Profile::Sin4);
        let mode = explicit_quasimode(&q, &mesh, &op).unwrap();
        let dir = std::env::temp_dir().join(format!("stadium-records-{}", std::process::id()));
        let mut rec = ModeRecord::from_mode(spec, &mode, "q.vec".into());
        rec.quasimode = Some(q);
        let path = save_mode(&dir, "q", &rec, &mode).unwrap();
        let (back, m) = load_mode(&path, &op).unwrap();
        assert_eq!(back, rec);
        assert_eq!(m.vector, mode.vector);
        assert_eq!(m.residual, mode.residual);
        assert_eq!(m.analytic_residual, mode.analytic_residual);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
