//! Instance files.
//!
//! A file is a single JSON object:
//!
//! ```text
//! {"kind":"cq-ensemble","dims":[d],"weights":[...],"matrices":[[[[re,im],...],...],...]}
//! ```
//!
//! `kind` is `density`, `cq-ensemble` or `bipartite`; `dims` is `[d]` or
//! `[dA, dB]`; `matrices` holds row-major matrices of `[re, im]` pairs.
//! Floats are written in shortest round-trip form, so `load(save(v)) == v`
//! bit for bit.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BipartiteState, CQEnsemble, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Density,
    CqEnsemble,
    Bipartite,
}

impl std::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InstanceKind::Density => "density",
            InstanceKind::CqEnsemble => "cq-ensemble",
            InstanceKind::Bipartite => "bipartite",
        })
    }
}

pub(crate) type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    kind: InstanceKind,
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    matrices: Vec<RawMatrix>,
}

/// Any of the three state kinds stored in an instance file.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Density(DensityMatrix),
    CqEnsemble(CQEnsemble),
    Bipartite(BipartiteState),
}

impl From<DensityMatrix> for Instance {
    fn from(v: DensityMatrix) -> Self {
        Instance::Density(v)
    }
}

impl From<CQEnsemble> for Instance {
    fn from(v: CQEnsemble) -> Self {
        Instance::CqEnsemble(v)
    }
}

impl From<BipartiteState> for Instance {
    fn from(v: BipartiteState) -> Self {
        Instance::Bipartite(v)
    }
}

pub(crate) fn to_raw(m: &HermitianMatrix) -> RawMatrix {
    let a = m.as_matrix();
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| [a[(i, j)].re, a[(i, j)].im])
                .collect()
        })
        .collect()
}

pub(crate) fn from_raw(raw: &RawMatrix, dim: usize, index: usize) -> Result<DensityMatrix> {
    if raw.len() != dim {
        return Err(Error::Parse(format!(
            "matrices[{index}]: expected {dim} rows, found {}",
            raw.len()
        )));
    }
    if let Some((r, row)) = raw.iter().enumerate().find(|(_, row)| row.len() != dim) {
        return Err(Error::Parse(format!(
            "matrices[{index}][{r}]: expected {dim} entries, found {}",
            row.len()
        )));
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| C64::new(raw[i][j][0], raw[i][j][1]));
    let h = HermitianMatrix::new(m).map_err(|e| Error::Invariant {
        invariant: "Hermitian",
        detail: format!("matrices[{index}]: {e}"),
    })?;
    DensityMatrix::new(h).map_err(|e| match e {
        Error::Invariant { invariant, detail } => Error::Invariant {
            invariant,
            detail: format!("matrices[{index}]: {detail}"),
        },
        other => other,
    })
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Density(_) => InstanceKind::Density,
            Instance::CqEnsemble(_) => InstanceKind::CqEnsemble,
            Instance::Bipartite(_) => InstanceKind::Bipartite,
        }
    }

    fn to_doc(&self) -> InstanceDoc {
        match self {
            Instance::Density(rho) => InstanceDoc {
                kind: self.kind(),
                dims: vec![rho.dim()],
                weights: None,
                matrices: vec![to_raw(rho.matrix())],
            },
            Instance::CqEnsemble(e) => InstanceDoc {
                kind: self.kind(),
                dims: vec![e.dim()],
                weights: Some(e.weights().to_vec()),
                matrices: e.states().iter().map(|s| to_raw(s.matrix())).collect(),
            },
            Instance::Bipartite(b) => InstanceDoc {
                kind: self.kind(),
                dims: vec![b.dim_a(), b.dim_b()],
                weights: None,
                matrices: vec![to_raw(b.state().matrix())],
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.to_doc()).expect("instance documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let expect_dims = |n: usize| -> Result<()> {
            if doc.dims.len() != n || doc.dims.contains(&0) {
                return Err(Error::Parse(format!(
                    "dims: expected {n} positive entries for kind {}, found {:?}",
                    doc.kind, doc.dims
                )));
            }
            Ok(())
        };
        let expect_count = |n: usize| -> Result<()> {
            if doc.matrices.len() != n {
                return Err(Error::Parse(format!(
                    "matrices: expected {n} matrices, found {}",
                    doc.matrices.len()
                )));
            }
            Ok(())
        };
        match doc.kind {
            InstanceKind::Density => {
                expect_dims(1)?;
                expect_count(1)?;
                if doc.weights.is_some() {
                    return Err(Error::Parse("weights: only allowed for cq-ensemble".into()));
                }
                Ok(Instance::Density(from_raw(
                    &doc.matrices[0],
                    doc.dims[0],
                    0,
                )?))
            }
            InstanceKind::CqEnsemble => {
                expect_dims(1)?;
                let weights = doc
                    .weights
                    .clone()
                    .ok_or_else(|| Error::Parse("weights: missing for cq-ensemble".into()))?;
                expect_count(weights.len())?;
                let states = doc
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(k, m)| from_raw(m, doc.dims[0], k))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Instance::CqEnsemble(CQEnsemble::new(weights, states)?))
            }
            InstanceKind::Bipartite => {
                expect_dims(2)?;
                expect_count(1)?;
                if doc.weights.is_some() {
                    return Err(Error::Parse("weights: only allowed for cq-ensemble".into()));
                }
                let (da, db) = (doc.dims[0], doc.dims[1]);
                let rho = from_raw(&doc.matrices[0], da * db, 0)?;
                Ok(Instance::Bipartite(BipartiteState::new(rho, da, db)?))
            }
        }
    }

    pub fn into_density(self) -> Result<DensityMatrix> {
        match self {
            Instance::Density(v) => Ok(v),
            other => Err(wrong_kind(InstanceKind::Density, other.kind())),
        }
    }

    pub fn into_cq_ensemble(self) -> Result<CQEnsemble> {
        match self {
            Instance::CqEnsemble(v) => Ok(v),
            other => Err(wrong_kind(InstanceKind::CqEnsemble, other.kind())),
        }
    }

    pub fn into_bipartite(self) -> Result<BipartiteState> {
        match self {
            Instance::Bipartite(v) => Ok(v),
            other => Err(wrong_kind(InstanceKind::Bipartite, other.kind())),
        }
    }
}

fn wrong_kind(expected: InstanceKind, found: InstanceKind) -> Error {
    Error::Invariant {
        invariant: "instance kind",
        detail: format!("expected a {expected} instance, found {found}"),
    }
}

pub fn save(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    fs::write(path, instance.to_json())?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    Instance::from_json(&text)
}

/// SHA-256 of the serialized instance, hex encoded.
pub fn instance_hash(instance: &Instance) -> String {
    hex::encode(Sha256::digest(instance.to_json().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_bipartite, random_cq_ensemble, random_density, Seed};

    #[test]
    fn round_trip_is_exact() {
        let cases: Vec<Instance> = vec![
            random_density(5, Seed(1)).unwrap().into(),
            random_cq_ensemble(4, 3, Seed(2)).unwrap().into(),
            random_bipartite(2, 3, Seed(3)).unwrap().into(),
        ];
        for inst in cases {
            let back = Instance::from_json(&inst.to_json()).unwrap();
            assert_eq!(back, inst);
            assert_eq!(back.to_json(), inst.to_json());
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.json");
        let inst: Instance = random_cq_ensemble(3, 2, Seed(5)).unwrap().into();
        save(&path, &inst).unwrap();
        assert_eq!(load(&path).unwrap(), inst);
    }

    #[test]
    fn half_trace_is_invariant_violation() {
        let text =
            r#"{"kind":"density","dims":[2],"matrices":[[[[0.25,0],[0,0]],[[0,0],[0.25,0]]]]}"#;
        match Instance::from_json(text) {
            Err(Error::Invariant { invariant, .. }) => assert_eq!(invariant, "unit trace"),
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let inst: Instance = random_density(3, Seed(8)).unwrap().into();
        let text = inst.to_json();
        let cut = &text[..text.len() / 2];
        match Instance::from_json(cut) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_matrix_is_parse_error() {
        let text = r#"{"kind":"density","dims":[2],"matrices":[[[[0.5,0],[0,0]],[[0.5,0]]]]}"#;
        assert!(matches!(Instance::from_json(text), Err(Error::Parse(_))));
    }

    #[test]
    fn hash_changes_with_content() {
        let a: Instance = random_density(3, Seed(1)).unwrap().into();
        let b: Instance = random_density(3, Seed(2)).unwrap().into();
        assert_eq!(instance_hash(&a), instance_hash(&a.clone()));
        assert_ne!(instance_hash(&a), instance_hash(&b));
    }
}
