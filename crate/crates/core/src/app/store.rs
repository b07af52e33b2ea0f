//! File-backed template database.
//!
//! Layout (little-endian):
//!
//! | field        | size            |
//! |--------------|-----------------|
//! | magic `IRDB` | 4               |
//! | version      | u16             |
//! | count        | u32             |
//! | per record: id length | u16    |
//! | id (UTF-8)   | id length       |
//! | eye (0 = left, 1 = right) | 1  |
//! | sample index | u16             |
//! | packed code  | 80              |

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{Eye, IrisTemplate, TEMPLATE_BYTES};

pub const STORE_MAGIC: &[u8; 4] = b"IRDB";
pub const STORE_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct StoreRecord {
    pub subject_id: String,
    pub eye: Eye,
    pub sample: u16,
    pub template: IrisTemplate,
}

impl StoreRecord {
    fn key(&self) -> (&str, Eye, u16) {
        (&self.subject_id, self.eye, self.sample)
    }
}

/// Records keyed by `(subject, eye, sample)`, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemplateStore {
    records: Vec<StoreRecord>,
}

impl TemplateStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[StoreRecord] {
        &self.records
    }

    pub fn contains(&self, subject: &str, eye: Eye, sample: u16) -> bool {
        self.records.iter().any(|r| r.key() == (subject, eye, sample))
    }

    /// Adds a record; the template's label is set from the key.
    pub fn insert(&mut self, subject: &str, eye: Eye, sample: u16, template: IrisTemplate) -> Result<()> {
        if subject.len() > u16::MAX as usize {
            return Err(Error::MalformedRecord(format!("subject id is {} bytes", subject.len())));
        }
        if self.contains(subject, eye, sample) {
            return Err(Error::DuplicateKey(format!("{subject}/{eye}/{sample}")));
        }
        self.records.push(StoreRecord {
            subject_id: subject.to_string(),
            eye,
            sample,
            template: template.with_label(subject, Some(eye)),
        });
        Ok(())
    }

    /// Inserts under the next free sample index of `(subject, eye)`.
    pub fn enroll(&mut self, subject: &str, eye: Eye, template: IrisTemplate) -> Result<u16> {
        let sample = self.next_sample(subject, eye)?;
        self.insert(subject, eye, sample, template)?;
        Ok(sample)
    }

    pub fn next_sample(&self, subject: &str, eye: Eye) -> Result<u16> {
        match self
            .records
            .iter()
            .filter(|r| r.subject_id == subject && r.eye == eye)
            .map(|r| r.sample)
            .max()
        {
            None => Ok(0),
            Some(u16::MAX) => Err(Error::MalformedRecord(format!("{subject}/{eye}: sample index exhausted"))),
            Some(s) => Ok(s + 1),
        }
    }

    /// Every stored template, labelled.
    pub fn templates(&self) -> Vec<IrisTemplate> {
        self.records.iter().map(|r| r.template.clone()).collect()
    }

    pub fn templates_of(&self, subject: &str) -> Vec<IrisTemplate> {
        self.records
            .iter()
            .filter(|r| r.subject_id == subject)
            .map(|r| r.template.clone())
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.records.len() * (TEMPLATE_BYTES + 16));
        out.extend_from_slice(STORE_MAGIC);
        out.extend_from_slice(&STORE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(&(r.subject_id.len() as u16).to_le_bytes());
            out.extend_from_slice(r.subject_id.as_bytes());
            out.push(r.eye.to_byte());
            out.extend_from_slice(&r.sample.to_le_bytes());
            out.extend_from_slice(&r.template.pack());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if bytes.len() < 4 {
            return Err(if STORE_MAGIC.starts_with(bytes) { Error::Truncated } else { Error::BadMagic });
        }
        if cur.take(4)? != STORE_MAGIC {
            return Err(Error::BadMagic);
        }
        let version = cur.u16()?;
        if version != STORE_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: STORE_VERSION,
            });
        }
        let count = cur.u32()? as usize;
        let mut store = TemplateStore {
            records: Vec::with_capacity(count.min(bytes.len() / (TEMPLATE_BYTES + 5))),
        };
        let mut seen = HashSet::with_capacity(count.min(1 << 16));
        for i in 0..count {
            let len = cur.u16()? as usize;
            let id = std::str::from_utf8(cur.take(len)?)
                .map_err(|_| Error::MalformedRecord(format!("record {i}: id is not UTF-8")))?
                .to_string();
            let eye_byte = cur.take(1)?[0];
            let eye = Eye::from_byte(eye_byte)
                .ok_or_else(|| Error::MalformedRecord(format!("record {i}: eye byte {eye_byte}")))?;
            let sample = cur.u16()?;
            let code = cur.take(TEMPLATE_BYTES)?;
            if !seen.insert((id.clone(), eye, sample)) {
                return Err(Error::DuplicateKey(format!("{id}/{eye}/{sample}")));
            }
            store.records.push(StoreRecord {
                template: IrisTemplate::unpack(code)?.with_label(&id, Some(eye)),
                subject_id: id,
                eye,
                sample,
            });
        }
        if cur.pos != bytes.len() {
            return Err(Error::MalformedRecord(format!("{} trailing bytes", bytes.len() - cur.pos)));
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_bytes(&bytes)
    }

    /// Loads `path`, or starts empty when it does not exist yet.
    pub fn open_or_new(path: impl AsRef<Path>) -> Result<Self> {
        match Self::load(path) {
            Err(Error::MissingFile(_)) => Ok(Self::new()),
            other => other,
        }
    }

    /// Writes to a temporary file in the target directory, then renames it
    /// over `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&self.to_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(Error::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::TEMPLATE_LEVELS;

    fn template(seed: usize) -> IrisTemplate {
        IrisTemplate::new((0..TEMPLATE_LEVELS).map(|i| ((i * 7 + seed * 13) % 4) as u8).collect()).unwrap()
    }

    fn three() -> TemplateStore {
        let mut s = TemplateStore::new();
        s.insert("alice", Eye::Left, 0, template(1)).unwrap();
        s.insert("alice", Eye::Right, 0, template(2)).unwrap();
        s.insert("bob", Eye::Left, 3, template(3)).unwrap();
        s
    }

    #[test]
    fn header_layout() {
        let b = three().to_bytes();
        assert_eq!(&b[..4], b"IRDB");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(&b[6..10], &[3, 0, 0, 0]);
        assert_eq!(&b[10..12], &[5, 0]);
        assert_eq!(&b[12..17], b"alice");
        assert_eq!(b[17], 0);
        assert_eq!(b.len(), 10 + 3 * (2 + 1 + 2 + 80) + 5 + 5 + 3);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.irdb");
        let s = three();
        s.save(&path).unwrap();
        assert_eq!(TemplateStore::load(&path).unwrap(), s);
    }

    #[test]
    fn truncation_anywhere() {
        let b = three().to_bytes();
        for n in 0..b.len() {
            assert!(matches!(TemplateStore::from_bytes(&b[..n]), Err(Error::Truncated)), "cut at {n}");
        }
    }

    #[test]
    fn distinct_header_errors() {
        let mut b = three().to_bytes();
        b[0] = b'X';
        assert!(matches!(TemplateStore::from_bytes(&b), Err(Error::BadMagic)));
        let mut b = three().to_bytes();
        b[4] = 9;
        assert!(matches!(
            TemplateStore::from_bytes(&b),
            Err(Error::VersionMismatch { found: 9, expected: 1 })
        ));
        let mut b = three().to_bytes();
        b[17] = 7;
        assert!(matches!(TemplateStore::from_bytes(&b), Err(Error::MalformedRecord(_))));
    }

    #[test]
    fn duplicate_keys() {
        let mut s = three();
        assert!(matches!(
            s.insert("bob", Eye::Left, 3, template(0)),
            Err(Error::DuplicateKey(_))
        ));
        assert_eq!(s.next_sample("bob", Eye::Left).unwrap(), 4);
        assert_eq!(s.enroll("bob", Eye::Right, template(0)).unwrap(), 0);
    }
}
