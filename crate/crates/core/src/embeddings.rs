//! The frozen message-embedding branch: a binary key -> vector store for
//! precomputed encoder outputs, a plain-text import path, and a
//! deterministic hashing encoder that needs no external model.
//!
//! Store layout (little-endian): magic `PULIEEMB`, format version u32 = 1,
//! dim u32, count u64, then `count` records of
//! `[key_len u16, key bytes (UTF-8), dim x f32]`.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::features::tokenize;

const MAGIC: &[u8; 8] = b"PULIEEMB";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("bad magic or unsupported version: not an embedding store")]
    BadMagic,
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("truncated embedding store")]
    TruncatedFile,
    #[error("duplicate embedding key `{key}`")]
    DuplicateKey { key: String },
    #[error("no embedding stored for key `{key}`")]
    MissingKey { key: String },
    #[error("key `{key}` exceeds the 65535-byte limit")]
    KeyTooLong { key: String },
    #[error("malformed embedding line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<String, Embedding>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> EmbeddingStore {
        EmbeddingStore {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: String, embedding: Embedding) -> Result<(), EmbedError> {
        if embedding.values.len() != self.dim {
            return Err(EmbedError::DimMismatch {
                expected: self.dim,
                found: embedding.values.len(),
            });
        }
        if self.entries.contains_key(&key) {
            return Err(EmbedError::DuplicateKey { key });
        }
        self.entries.insert(key, embedding);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// The stored vector for `key`; no default substitution.
    pub fn lookup(&self, key: &str) -> Result<&Embedding, EmbedError> {
        self.entries.get(key).ok_or_else(|| EmbedError::MissingKey {
            key: key.to_string(),
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Serialize a store. Records are written in sorted key order so equal
/// stores produce byte-identical files.
pub fn write_store<W: Write>(store: &EmbeddingStore, mut writer: W) -> Result<(), EmbedError> {
    writer.write_all(MAGIC)?;
    writer.write_all(&FORMAT_VERSION.to_le_bytes())?;
    writer.write_all(&(store.dim as u32).to_le_bytes())?;
    writer.write_all(&(store.entries.len() as u64).to_le_bytes())?;
    for (key, embedding) in &store.entries {
        let key_bytes = key.as_bytes();
        if key_bytes.len() > u16::MAX as usize {
            return Err(EmbedError::KeyTooLong { key: key.clone() });
        }
        writer.write_all(&(key_bytes.len() as u16).to_le_bytes())?;
        writer.write_all(key_bytes)?;
        for v in &embedding.values {
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_store_file<P: AsRef<Path>>(store: &EmbeddingStore, path: P) -> Result<(), EmbedError> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    write_store(store, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub fn load_store<R: Read>(mut reader: R) -> Result<EmbeddingStore, EmbedError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut cursor = Cursor {
        bytes: &bytes,
        pos: 0,
    };

    if cursor.take(8)? != MAGIC {
        return Err(EmbedError::BadMagic);
    }
    let version = u32::from_le_bytes(cursor.take(4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(EmbedError::BadMagic);
    }
    let dim = u32::from_le_bytes(cursor.take(4)?.try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(cursor.take(8)?.try_into().unwrap());

    let mut store = EmbeddingStore::new(dim);
    for _ in 0..count {
        let key_len = u16::from_le_bytes(cursor.take(2)?.try_into().unwrap()) as usize;
        let key = std::str::from_utf8(cursor.take(key_len)?)
            .map_err(|_| EmbedError::TruncatedFile)?
            .to_string();
        let raw = cursor.take(dim * 4)?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        store.insert(key, Embedding { values })?;
    }
    Ok(store)
}

pub fn load_store_file<P: AsRef<Path>>(path: P) -> Result<EmbeddingStore, EmbedError> {
    let file = std::fs::File::open(path)?;
    load_store(std::io::BufReader::new(file))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbedError> {
        if self.pos + n > self.bytes.len() {
            return Err(EmbedError::TruncatedFile);
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
}

/// Import a plain-text matrix produced by an external encoder run: one line
/// per message, `key<TAB>v0 v1 ... v{dim-1}`.
pub fn import_text<R: BufRead>(reader: R) -> Result<EmbeddingStore, EmbedError> {
    let mut store: Option<EmbeddingStore> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let (key, rest) = line
            .split_once('\t')
            .ok_or_else(|| EmbedError::MalformedLine {
                line: line_no,
                reason: "expected `key<TAB>values`".to_string(),
            })?;
        let values: Vec<f32> = rest
            .split_whitespace()
            .map(|v| {
                v.parse::<f32>().map_err(|_| EmbedError::MalformedLine {
                    line: line_no,
                    reason: format!("`{v}` is not a number"),
                })
            })
            .collect::<Result<_, _>>()?;
        let store = store.get_or_insert_with(|| EmbeddingStore::new(values.len()));
        store.insert(key.to_string(), Embedding { values })?;
    }
    store.ok_or(EmbedError::MalformedLine {
        line: 0,
        reason: "empty embedding matrix".to_string(),
    })
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    eat(&seed.to_le_bytes());
    for part in parts {
        eat(part);
    }
    h
}

/// Deterministic signed feature-hashing embedding over token unigrams and
/// bigrams. Each n-gram lands in bucket `h mod dim` with sign taken from
/// the next bit of the hash (the low bit of `h / dim`); the result is
/// L2-normalized unless it is the zero vector.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Embedding {
    assert!(dim >= 1, "embedding dimension must be at least 1");
    let tokens = tokenize(text);
    let mut values = vec![0.0f32; dim];
    let mut accumulate = |h: u64| {
        let bucket = (h % dim as u64) as usize;
        let sign = if (h / dim as u64) & 1 == 0 { 1.0 } else { -1.0 };
        values[bucket] += sign;
    };
    for token in &tokens {
        accumulate(fnv1a64(seed, &[token.as_bytes()]));
    }
    // 0xFF cannot occur inside UTF-8, so it cleanly separates bigram parts.
    for pair in tokens.windows(2) {
        accumulate(fnv1a64(
            seed,
            &[pair[0].as_bytes(), &[0xFF], pair[1].as_bytes()],
        ));
    }
    let norm: f32 = values.iter().map(|v| v * v).sum::<f32>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    Embedding { values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_store() -> EmbeddingStore {
        let mut store = EmbeddingStore::new(3);
        store
            .insert(
                "1:1".into(),
                Embedding {
                    values: vec![1.0, -2.0, 0.5],
                },
            )
            .unwrap();
        store
            .insert(
                "1:4".into(),
                Embedding {
                    values: vec![0.0, 3.25, -1.0],
                },
            )
            .unwrap();
        store
    }

    #[test]
    fn round_trip() {
        let store = sample_store();
        let mut buf = Vec::new();
        write_store(&store, &mut buf).unwrap();
        let back = load_store(&buf[..]).unwrap();
        assert_eq!(store, back);
    }

    #[test]
    fn bad_magic_rejected() {
        let mut buf = Vec::new();
        write_store(&sample_store(), &mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(load_store(&buf[..]), Err(EmbedError::BadMagic)));
    }

    #[test]
    fn truncated_record_rejected() {
        let mut buf = Vec::new();
        write_store(&sample_store(), &mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(
            load_store(&buf[..]),
            Err(EmbedError::TruncatedFile)
        ));
    }

    #[test]
    fn duplicate_key_rejected() {
        let mut store = sample_store();
        let err = store
            .insert(
                "1:1".into(),
                Embedding {
                    values: vec![0.0; 3],
                },
            )
            .unwrap_err();
        assert!(matches!(err, EmbedError::DuplicateKey { .. }));
    }

    #[test]
    fn wrong_dim_rejected() {
        let mut store = sample_store();
        let err = store
            .insert(
                "1:9".into(),
                Embedding {
                    values: vec![0.0; 2],
                },
            )
            .unwrap_err();
        assert!(matches!(
            err,
            EmbedError::DimMismatch {
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn lookup_behaviour() {
        let store = sample_store();
        assert_eq!(store.lookup("1:1").unwrap().values[0], 1.0);
        assert_eq!(store.lookup("1:1").unwrap(), store.lookup("1:1").unwrap());
        assert!(matches!(
            store.lookup("9:9"),
            Err(EmbedError::MissingKey { .. })
        ));
    }

    #[test]
    fn import_text_matrix() {
        let text = "1:1\t0.5 -1.5 2\n1:4\t0 0 1\n";
        let store = import_text(text.as_bytes()).unwrap();
        assert_eq!(store.dim(), 3);
        assert_eq!(store.lookup("1:4").unwrap().values, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn import_dim_mismatch() {
        let text = "a\t1 2 3\nb\t1 2\n";
        assert!(matches!(
            import_text(text.as_bytes()),
            Err(EmbedError::DimMismatch { .. })
        ));
    }

    #[test]
    fn hash_embed_deterministic_and_normalized() {
        let a = hash_embed("I will support you in the north", 64, 7);
        let b = hash_embed("I will support you in the north", 64, 7);
        assert_eq!(a, b);
        let norm: f32 = a.values.iter().map(|v| v * v).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hash_embed_empty_text_is_zero() {
        let e = hash_embed("", 16, 0);
        assert!(e.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hash_embed_seed_changes_vector() {
        let a = hash_embed("hello world", 64, 1);
        let b = hash_embed("hello world", 64, 2);
        assert_ne!(a, b);
    }

    #[test]
    fn hash_embed_collision_spot_check() {
        let mut distinct: std::collections::HashSet<Vec<u32>> = std::collections::HashSet::new();
        for i in 0..120 {
            let text = format!("message number {i} about province {}", i * 13 % 29);
            let e = hash_embed(&text, 768, 0);
            distinct.insert(e.values.iter().map(|v| v.to_bits()).collect());
        }
        assert!(distinct.len() >= 119);
    }
}
