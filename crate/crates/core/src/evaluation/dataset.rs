use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Eye;
use crate::segmentation::{IrisGeometry, PupilCircle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub subject: String,
    pub eye: Option<Eye>,
    pub path: PathBuf,
}

/// Images grouped by subject, laid out as `root/<subject>/*.pgm|*.bmp`.
/// Entries are ordered by subject name, then by path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub entries: Vec<DatasetEntry>,
}

/// Eye flag from a file stem: a `_l_`/`_r_`-style token (`left`/`right`
/// also accepted), or the letter right before the trailing digits as in
/// `S1001L03`.
pub fn eye_from_stem(stem: &str) -> Option<Eye> {
    let lower = stem.to_ascii_lowercase();
    for token in lower.split(['_', '-', '.']) {
        if let Ok(eye) = token.parse::<Eye>() {
            return Some(eye);
        }
    }
    let trimmed = lower.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.len() < lower.len() {
        match trimmed.chars().last() {
            Some('l') => return Some(Eye::Left),
            Some('r') => return Some(Eye::Right),
            _ => {}
        }
    }
    None
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "bmp"))
}

impl DatasetIndex {
    pub fn load(root: &Path) -> Result<Self> {
        if !root.is_dir() {
            return Err(Error::MissingFile(root.to_path_buf()));
        }
        let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dirs.sort();
        let mut entries = Vec::new();
        for dir in dirs {
            let subject = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_image(p))
                .collect();
            files.sort();
            for path in files {
                let eye = path.file_stem().and_then(|s| s.to_str()).and_then(eye_from_stem);
                entries.push(DatasetEntry {
                    subject: subject.clone(),
                    eye,
                    path,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps entries of one eye (`None` keeps all).
    pub fn filter_eye(&self, eye: Option<Eye>) -> DatasetIndex {
        DatasetIndex {
            entries: self
                .entries
                .iter()
                .filter(|e| eye.is_none() || e.eye == eye)
                .cloned()
                .collect(),
        }
    }

    /// Entry indices per subject, in index order.
    pub fn by_subject(&self) -> BTreeMap<String, Vec<usize>> {
        let mut map: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            map.entry(e.subject.clone()).or_default().push(i);
        }
        map
    }

    pub fn subject_count(&self) -> usize {
        self.by_subject().len()
    }
}

/// Sidecar path holding the ground truth of an image (`x.pgm` → `x.circles`).
pub fn circles_path(image: &Path) -> PathBuf {
    image.with_extension("circles")
}

/// Parses `cx cy r_p r_l`.
pub fn parse_circles(text: &str) -> Result<IrisGeometry> {
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("bad circles file: {e}")))?;
    if vals.len() != 4 {
        return Err(Error::Config(format!("circles file needs 4 numbers, got {}", vals.len())));
    }
    Ok(IrisGeometry {
        pupil: PupilCircle {
            cx: vals[0],
            cy: vals[1],
            r: vals[2],
        },
        limbic_r: vals[3],
    })
}

pub fn format_circles(g: &IrisGeometry) -> String {
    format!("{} {} {} {}\n", g.pupil.cx, g.pupil.cy, g.pupil.r, g.limbic_r)
}

pub fn read_circles(image: &Path) -> Result<IrisGeometry> {
    let path = circles_path(image);
    let text = fs::read_to_string(&path).map_err(|_| Error::MissingGroundTruth(image.to_path_buf()))?;
    parse_circles(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eye_flags() {
        assert_eq!(eye_from_stem("S1001L03"), Some(Eye::Left));
        assert_eq!(eye_from_stem("s2_R_04"), Some(Eye::Right));
        assert_eq!(eye_from_stem("001_1_1"), None);
        assert_eq!(eye_from_stem("left-2"), Some(Eye::Left));
    }

    #[test]
    fn circles_round_trip() {
        let g = IrisGeometry {
            pupil: PupilCircle { cx: 10.5, cy: 20.25, r: 30.0 },
            limbic_r: 91.125,
        };
        assert_eq!(parse_circles(&format_circles(&g)).unwrap(), g);
        assert!(parse_circles("1 2 3").is_err());
    }

    #[test]
    fn load_layout() {
        let dir = tempfile::tempdir().unwrap();
        for (s, f) in [("b", "2.pgm"), ("b", "1.bmp"), ("a", "x_L_1.pgm"), ("a", "notes.txt")] {
            fs::create_dir_all(dir.path().join(s)).unwrap();
            fs::write(dir.path().join(s).join(f), b"").unwrap();
        }
        let idx = DatasetIndex::load(dir.path()).unwrap();
        let names: Vec<String> = idx
            .entries
            .iter()
            .map(|e| format!("{}/{}", e.subject, e.path.file_name().unwrap().to_str().unwrap()))
            .collect();
        assert_eq!(names, ["a/x_L_1.pgm", "b/1.bmp", "b/2.pgm"]);
        assert_eq!(idx.entries[0].eye, Some(Eye::Left));
        assert_eq!(idx.subject_count(), 2);
        assert!(DatasetIndex::load(&dir.path().join("missing")).is_err());
    }
}
