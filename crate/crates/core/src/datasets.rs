//! The four benchmark networks.
//!
//! Florentine business ties and Sampson's monks are vendored in `data/` and
//! compiled in. The molecule and dolphins networks are not redistributed
//! here; drop `molecule.edges` (20 nodes, undirected) or `dolphins.edges`
//! (62 nodes, undirected) into a data directory and [`fetch_datasets`] will
//! validate and report them.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ErgmError, Result};
use crate::graph::Graph;
use crate::io::{load_graph, parse_edge_list};
use crate::statistics::ModelSpec;

const FLORENTINE: &str = include_str!("../data/florentine.edges");
const FLORENTINE_SHA256: &str = "aeebaedcb4b9ee6b84131013287b5359ef6e0b50f6e2b6d6b4fb811bc3c54ab1";
const MONKS: &str = include_str!("../data/monks.edges");
const MONKS_SHA256: &str = "5e1ca67cd897f73731a41500283749ca6866fcd3dd22dc55fc90337541e0dee9";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dataset {
    Florentine,
    Molecule,
    Dolphins,
    Monks,
}

impl Dataset {
    pub const ALL: [Dataset; 4] = [Dataset::Florentine, Dataset::Molecule, Dataset::Dolphins, Dataset::Monks];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Florentine => "florentine",
            Dataset::Molecule => "molecule",
            Dataset::Dolphins => "dolphins",
            Dataset::Monks => "monks",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.edges", self.name())
    }

    pub fn nodes(self) -> usize {
        match self {
            Dataset::Florentine => 16,
            Dataset::Molecule => 20,
            Dataset::Dolphins => 62,
            Dataset::Monks => 18,
        }
    }

    pub fn directed(self) -> bool {
        self == Dataset::Monks
    }

    fn vendored(self) -> Option<(&'static str, &'static str)> {
        match self {
            Dataset::Florentine => Some((FLORENTINE, FLORENTINE_SHA256)),
            Dataset::Monks => Some((MONKS, MONKS_SHA256)),
            Dataset::Molecule | Dataset::Dolphins => None,
        }
    }

    pub fn is_vendored(self) -> bool {
        self.vendored().is_some()
    }

    /// The benchmark model fitted to this network.
    pub fn reference_model(self) -> ModelSpec {
        let terms = match self {
            Dataset::Florentine => "edges + kstar2",
            Dataset::Molecule => "edges + kstar2 + kstar3 + triangle",
            Dataset::Dolphins => "edges + gwdegree(0.8) + gwesp(0.8)",
            Dataset::Monks => "edges + mutual + ctriple",
        };
        ModelSpec::parse(terms, self.directed()).expect("reference models are valid")
    }

    /// Checks node count and directedness of a loaded copy.
    pub fn check(self, g: &Graph) -> Result<()> {
        if g.n() != self.nodes() || g.is_directed() != self.directed() {
            return Err(ErgmError::config(format!(
                "{} should have {} nodes ({}), found {} ({})",
                self.name(),
                self.nodes(),
                kind(self.directed()),
                g.n(),
                kind(g.is_directed())
            )));
        }
        Ok(())
    }
}

fn kind(directed: bool) -> &'static str {
    if directed {
        "directed"
    } else {
        "undirected"
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = ErgmError;

    fn from_str(s: &str) -> Result<Self> {
        Dataset::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ErgmError::config(format!("unknown dataset `{s}`")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads a vendored network; fails for the ones that must be supplied.
pub fn load_dataset(d: Dataset) -> Result<Graph> {
    let (text, sha) = d.vendored().ok_or_else(|| {
        ErgmError::config(format!(
            "{d} is not bundled; place {} in a data directory and use load_dataset_from",
            d.file_name()
        ))
    })?;
    let found = sha256_hex(text.as_bytes());
    if found != sha {
        return Err(ErgmError::Checksum {
            path: PathBuf::from(d.file_name()),
            expected: sha.into(),
            found,
        });
    }
    let g = parse_edge_list(text, &d.file_name())?;
    d.check(&g)?;
    Ok(g)
}

/// Loads `dir/<name>.edges`, checking node count and directedness.
pub fn load_dataset_from(d: Dataset, dir: impl AsRef<Path>) -> Result<Graph> {
    let g = load_graph(dir.as_ref().join(d.file_name()))?;
    d.check(&g)?;
    Ok(g)
}

/// Vendored networks load from the binary; the others from the first of
/// `dirs` that holds a valid copy.
pub fn locate_dataset(d: Dataset, dirs: &[PathBuf]) -> Option<Graph> {
    if d.is_vendored() {
        return load_dataset(d).ok();
    }
    dirs.iter().find_map(|dir| load_dataset_from(d, dir).ok())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FetchStatus {
    Written,
    /// A valid copy was already present.
    Unchanged,
    /// Not bundled, but a valid user-supplied copy is present.
    UserSupplied,
    /// Not bundled and no copy present.
    Missing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FetchReport {
    pub dataset: Dataset,
    pub path: PathBuf,
    pub status: FetchStatus,
}

/// Materializes the bundled networks as edge-list files in `dir` and reports
/// on the ones that must be supplied. An existing bundled file whose content
/// differs from the bundled copy is a checksum error.
pub fn fetch_datasets(dir: impl AsRef<Path>) -> Result<Vec<FetchReport>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    Dataset::ALL
        .into_iter()
        .map(|d| {
            let path = dir.join(d.file_name());
            let status = match d.vendored() {
                Some((text, sha)) => {
                    load_dataset(d)?;
                    if path.exists() {
                        let found = sha256_hex(&fs::read(&path)?);
                        if found != sha {
                            return Err(ErgmError::Checksum { path, expected: sha.into(), found });
                        }
                        FetchStatus::Unchanged
                    } else {
                        fs::write(&path, text)?;
                        FetchStatus::Written
                    }
                }
                None if path.exists() => {
                    load_dataset_from(d, dir)?;
                    FetchStatus::UserSupplied
                }
                None => FetchStatus::Missing,
            };
            Ok(FetchReport { dataset: d, path, status })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::global_stats;

    #[test]
    fn vendored_networks() {
        let f = load_dataset(Dataset::Florentine).unwrap();
        assert_eq!((f.n(), f.edge_count()), (16, 15));
        let s = global_stats(&f, &Dataset::Florentine.reference_model()).unwrap();
        assert_eq!(s.as_slice(), &[15.0, 36.0]);
        let m = load_dataset(Dataset::Monks).unwrap();
        assert!(m.is_directed());
        let s = global_stats(&m, &Dataset::Monks.reference_model()).unwrap();
        assert_eq!(s.as_slice(), &[88.0, 28.0, 39.0]);
        assert!(load_dataset(Dataset::Dolphins).is_err());
    }

    #[test]
    fn fetch_writes_then_noops() {
        let dir = tempfile::tempdir().unwrap();
        let first = fetch_datasets(dir.path()).unwrap();
        let status = |r: &[FetchReport], d| r.iter().find(|x| x.dataset == d).unwrap().status;
        assert_eq!(status(&first, Dataset::Florentine), FetchStatus::Written);
        assert_eq!(status(&first, Dataset::Monks), FetchStatus::Written);
        assert_eq!(status(&first, Dataset::Molecule), FetchStatus::Missing);
        let again = fetch_datasets(dir.path()).unwrap();
        assert_eq!(status(&again, Dataset::Florentine), FetchStatus::Unchanged);
        assert_eq!(load_graph(dir.path().join("monks.edges")).unwrap().n(), 18);
    }

    #[test]
    fn fetch_detects_tampering_and_checks_user_files() {
        let dir = tempfile::tempdir().unwrap();
        fetch_datasets(dir.path()).unwrap();
        fs::write(dir.path().join("florentine.edges"), "16 undirected\n0 1\n").unwrap();
        assert!(matches!(fetch_datasets(dir.path()), Err(ErgmError::Checksum { .. })));

        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("molecule.edges"), "20 undirected\n0 1\n1 2\n").unwrap();
        let r = fetch_datasets(dir.path()).unwrap();
        assert_eq!(r[1].status, FetchStatus::UserSupplied);
        assert!(locate_dataset(Dataset::Molecule, &[dir.path().to_path_buf()]).is_some());
        fs::write(dir.path().join("dolphins.edges"), "61 undirected\n0 1\n").unwrap();
        assert!(fetch_datasets(dir.path()).is_err());
    }

    #[test]
    fn names_round_trip() {
        for d in Dataset::ALL {
            assert_eq!(d.name().parse::<Dataset>().unwrap(), d);
            assert_eq!(d.reference_model().is_directed(), d.directed());
        }
        assert!("karate".parse::<Dataset>().is_err());
    }
}
