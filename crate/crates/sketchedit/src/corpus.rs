//! Triplet directories.
//!
//! Triplet `i` is stored as `NNNN.orig.seq`, `NNNN.target.tsdf` and
//! `NNNN.truth.seq` with `NNNN` the zero-padded index. A TOML `manifest`
//! records the recipe and, per triplet, its edit class, seed, ground-truth
//! edit distance and edited segment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sketchedit_core::segment::SegmentId;
use thiserror::Error;

use crate::format::{read_grid, read_sequence, write_atomic, write_grid, write_sequence, FormatError};
use crate::synth::{EditClass, SynthSpec, Triplet};

pub const MANIFEST: &str = "manifest";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("manifest: {0}")]
    Manifest(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub index: usize,
    pub class: EditClass,
    /// Hex, since TOML integers stop at `i64::MAX`.
    pub seed: String,
    pub truth_edit_distance: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edited_segment: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub recipe: SynthSpec,
    #[serde(default, rename = "triplet")]
    pub triplets: Vec<ManifestEntry>,
}

pub fn stem(index: usize) -> String {
    format!("{index:04}")
}

pub fn write_corpus(dir: &Path, recipe: &SynthSpec, triplets: &[Triplet]) -> Result<(), CorpusError> {
    fs::create_dir_all(dir).map_err(|e| CorpusError::Io(dir.to_path_buf(), e))?;
    let mut entries = Vec::with_capacity(triplets.len());
    for (i, t) in triplets.iter().enumerate() {
        let s = stem(i);
        write_sequence(&dir.join(format!("{s}.orig.seq")), &t.original)?;
        write_grid(&dir.join(format!("{s}.target.tsdf")), &t.target)?;
        write_sequence(&dir.join(format!("{s}.truth.seq")), &t.truth)?;
        entries.push(ManifestEntry {
            index: i,
            class: t.edit_class,
            seed: format!("{:016x}", t.seed),
            truth_edit_distance: t.truth_edit_distance,
            edited_segment: t.edited_segment.map(|id| id.to_string()),
        });
    }
    let manifest = Manifest { recipe: recipe.clone(), triplets: entries };
    let text = toml::to_string(&manifest).map_err(|e| CorpusError::Manifest(e.to_string()))?;
    write_atomic(&dir.join(MANIFEST), text.as_bytes())?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CorpusError::Io(path, e))?;
    toml::from_str(&text).map_err(|e| CorpusError::Manifest(e.to_string()))
}

pub fn read_corpus(dir: &Path) -> Result<(Manifest, Vec<Triplet>), CorpusError> {
    let manifest = read_manifest(dir)?;
    let bad = |m: String| CorpusError::Manifest(m);
    let triplets = manifest
        .triplets
        .iter()
        .map(|e| {
            let s = stem(e.index);
            let seed = u64::from_str_radix(&e.seed, 16).map_err(|_| bad(format!("bad seed `{}`", e.seed)))?;
            let edited_segment = match &e.edited_segment {
                Some(text) => Some(text.parse::<SegmentId>().map_err(|_| bad(format!("bad segment `{text}`")))?),
                None => None,
            };
            Ok(Triplet {
                original: read_sequence(&dir.join(format!("{s}.orig.seq")))?,
                target: read_grid(&dir.join(format!("{s}.target.tsdf")))?,
                truth: read_sequence(&dir.join(format!("{s}.truth.seq")))?,
                edit_class: e.class,
                truth_edit_distance: e.truth_edit_distance,
                edited_segment,
                seed,
            })
        })
        .collect::<Result<_, CorpusError>>()?;
    Ok((manifest, triplets))
}
