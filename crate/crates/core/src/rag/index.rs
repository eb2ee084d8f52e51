use std::cmp::Ordering;
use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::providers::{SentenceEmbedder, SENTENCE_DIM};
use crate::rag::{Chunk, RagError, Stage};
use crate::Scalar;

pub const INDEX_MAGIC: &[u8; 8] = b"NRXINDX\0";
pub const INDEX_VERSION: u32 = 1;

/// A search result; `distance` is the squared L2 distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit<T> {
    pub id: u64,
    pub distance: T,
}

/// Flat exact-search index: one row per id, compared by squared L2.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex<T> {
    vectors: Array2<T>,
    ids: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    metric: String,
    dim: usize,
    count: usize,
}

fn compare<T: Scalar>(a: &Hit<T>, b: &Hit<T>) -> Ordering {
    a.distance
        .partial_cmp(&b.distance)
        .unwrap_or(Ordering::Equal)
        .then(a.id.cmp(&b.id))
}

impl<T: Scalar> VectorIndex<T> {
    pub fn new(ids: Vec<u64>, vectors: Array2<T>) -> Result<Self, RagError> {
        if ids.is_empty() {
            return Err(RagError::EmptyIndex);
        }
        if ids.len() != vectors.nrows() {
            return Err(RagError::Format(format!(
                "{} ids for {} vectors",
                ids.len(),
                vectors.nrows()
            )));
        }
        let mut seen = HashSet::new();
        for (&id, row) in ids.iter().zip(vectors.outer_iter()) {
            if !seen.insert(id) {
                return Err(RagError::DuplicateId(id));
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(RagError::NonFinite(id));
            }
        }
        Ok(Self { vectors, ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn vectors(&self) -> &Array2<T> {
        &self.vectors
    }

    pub fn contains(&self, id: u64) -> bool {
        self.ids.contains(&id)
    }

    /// The `k` nearest rows, ascending by distance, ties by ascending id.
    pub fn search(&self, query: &[T], k: usize) -> Result<Vec<Hit<T>>, RagError> {
        if query.len() != self.dim() {
            return Err(RagError::Dimension {
                expected: self.dim(),
                actual: query.len(),
            });
        }
        if k == 0 || k > self.len() {
            return Err(RagError::Bounds { k, n: self.len() });
        }
        let mut hits: Vec<Hit<T>> = self
            .vectors
            .outer_iter()
            .zip(&self.ids)
            .map(|(row, &id)| Hit {
                id,
                distance: row
                    .iter()
                    .zip(query)
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum(),
            })
            .collect();
        if k < hits.len() {
            hits.select_nth_unstable_by(k - 1, compare);
            hits.truncate(k);
        }
        hits.sort_by(compare);
        Ok(hits)
    }

    /// Header JSON, row-major little-endian f64 vectors, u64 id table,
    /// CRC-32 trailer.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&Header {
            format_version: INDEX_VERSION,
            metric: "l2".into(),
            dim: self.dim(),
            count: self.len(),
        })
        .expect("header serializes");
        let mut out = Vec::with_capacity(16 + header.len() + 8 * (self.vectors.len() + self.len()));
        out.extend_from_slice(INDEX_MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for v in self.vectors.iter() {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        for id in &self.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RagError> {
        if bytes.len() < 16 || &bytes[..8] != INDEX_MAGIC {
            return Err(RagError::Format("bad magic bytes".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().expect("4 bytes")) {
            return Err(RagError::Checksum);
        }
        let header_len = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes")) as usize;
        let json = body
            .get(12..12 + header_len)
            .ok_or_else(|| RagError::Format("truncated header".into()))?;
        let header: Header = serde_json::from_slice(json).map_err(|e| RagError::Format(e.to_string()))?;
        if header.format_version != INDEX_VERSION {
            return Err(RagError::Version {
                found: header.format_version,
                expected: INDEX_VERSION,
            });
        }
        let payload = &body[12 + header_len..];
        let floats = header.dim * header.count;
        if payload.len() != 8 * (floats + header.count) {
            return Err(RagError::Format("payload length does not match header".into()));
        }
        let (vec_bytes, id_bytes) = payload.split_at(8 * floats);
        let values: Vec<T> = vec_bytes
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        let ids = id_bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let vectors = Array2::from_shape_vec((header.count, header.dim), values)
            .map_err(|e| RagError::Format(e.to_string()))?;
        Self::new(ids, vectors)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RagError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RagError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Embeds every chunk (in parallel, bounded by the provider) and indexes
/// the vectors under the chunk ids. Any embedding failure aborts the build.
pub fn build_index(chunks: &[Chunk], embedder: &dyn SentenceEmbedder) -> Result<VectorIndex<f64>, RagError> {
    if chunks.is_empty() {
        return Err(RagError::EmptyIndex);
    }
    let rows = chunks
        .par_iter()
        .map(|c| embedder.embed_sentence(&c.text))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| RagError::Provider {
            stage: Stage::Embed,
            source,
        })?;
    let mut vectors = Array2::zeros((chunks.len(), SENTENCE_DIM));
    for (mut dst, src) in vectors.outer_iter_mut().zip(&rows) {
        dst.assign(&ndarray::ArrayView1::from(src.as_slice()));
    }
    VectorIndex::new(chunks.iter().map(|c| c.id).collect(), vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(n: usize, dim: usize) -> VectorIndex<f64> {
        VectorIndex::new((0..n as u64).collect(), Array2::eye(dim).slice(ndarray::s![..n, ..]).to_owned()).unwrap()
    }

    #[test]
    fn self_match_first() {
        let idx = one_hot(3, 384);
        let mut q = vec![0.0; 384];
        q[1] = 1.0;
        let hits = idx.search(&q, 1).unwrap();
        assert_eq!(hits, vec![Hit { id: 1, distance: 0.0 }]);
    }

    #[test]
    fn ties_break_by_id() {
        let idx = one_hot(3, 4);
        let hits = idx.search(&[0.0; 4], 3).unwrap();
        assert_eq!(hits.iter().map(|h| h.id).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn k_bounds() {
        let idx = one_hot(3, 4);
        assert!(matches!(idx.search(&[0.0; 4], 4), Err(RagError::Bounds { k: 4, n: 3 })));
        assert!(matches!(idx.search(&[0.0; 4], 0), Err(RagError::Bounds { .. })));
        assert!(matches!(idx.search(&[0.0; 3], 1), Err(RagError::Dimension { .. })));
    }

    #[test]
    fn rejects_duplicates_and_nan() {
        let v = Array2::<f64>::zeros((2, 3));
        assert!(matches!(VectorIndex::new(vec![4, 4], v.clone()), Err(RagError::DuplicateId(4))));
        let mut bad = v;
        bad[[1, 2]] = f64::NAN;
        assert!(matches!(VectorIndex::new(vec![0, 1], bad), Err(RagError::NonFinite(1))));
    }

    #[test]
    fn bytes_round_trip_and_checksum() {
        let idx = one_hot(3, 5);
        let mut bytes = idx.to_bytes();
        assert_eq!(VectorIndex::<f64>::from_bytes(&bytes).unwrap(), idx);
        bytes[20] ^= 0x10;
        assert!(VectorIndex::<f64>::from_bytes(&bytes).is_err());
    }
}
