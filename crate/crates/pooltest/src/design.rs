//! Random pool sampling, the t x m separation matrix, separability
//! checking, outcome simulation, and decoding.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::enumerate::{Occurrence, OccurrenceRecord};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// One test: a random subset of the host's vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pool {
    pub vertices: VertexSet,
}

/// Addressable random stream: pool `index` of attempt `attempt` under a
/// base seed. Identical coordinates always reproduce the same generator.
pub fn pool_rng(seed: u64, attempt: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&attempt.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Samples `t` pools, each vertex included independently with probability `p`.
pub fn sample_pools(g: &Graph, p: f64, t: usize, seed: u64) -> Vec<Pool> {
    sample_pools_attempt(g, p, t, seed, 0)
}

/// Same, on the attempt-`attempt` stream of the seed schedule.
pub fn sample_pools_attempt(g: &Graph, p: f64, t: usize, seed: u64, attempt: u64) -> Vec<Pool> {
    let n = g.vertex_count();
    (0..t)
        .map(|l| {
            let mut rng = pool_rng(seed, attempt, l as u64);
            let mut vertices = VertexSet::empty(n);
            for v in 0..n as u32 {
                if rng.gen::<f64>() < p {
                    vertices.insert(v);
                }
            }
            Pool { vertices }
        })
        .collect()
}

/// Dense t x m binary matrix, rows packed into 64-bit words.
/// Entry (l, j) = 1 iff pool l contains an edge of occurrence j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationMatrix {
    t: usize,
    m: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl SeparationMatrix {
    pub fn rows(&self) -> usize {
        self.t
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn get(&self, l: usize, j: usize) -> bool {
        debug_assert!(l < self.t && j < self.m);
        self.rows[l * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    /// Column `j` packed into ceil(t/64) words, bit l = entry (l, j).
    pub fn column_packed(&self, j: usize) -> Vec<u64> {
        let mut col = vec![0u64; self.t.div_ceil(64).max(1)];
        for l in 0..self.t {
            if self.get(l, j) {
                col[l / 64] |= 1u64 << (l % 64);
            }
        }
        col
    }

    /// Row `l` as a hex string of ceil(m/8) bytes, column j at bit
    /// (7 - j % 8) of byte j / 8.
    pub fn row_hex(&self, l: usize) -> String {
        let mut bytes = vec![0u8; self.m.div_ceil(8)];
        for j in 0..self.m {
            if self.get(l, j) {
                bytes[j / 8] |= 1 << (7 - j % 8);
            }
        }
        hex::encode(bytes)
    }
}

/// Builds the separation matrix for the given pools and occurrence list.
pub fn build_matrix(_g: &Graph, pools: &[Pool], occurrences: &[Occurrence]) -> SeparationMatrix {
    let t = pools.len();
    let m = occurrences.len();
    let words_per_row = m.div_ceil(64).max(1);
    let mut rows = vec![0u64; t * words_per_row];
    for (l, pool) in pools.iter().enumerate() {
        for (j, occ) in occurrences.iter().enumerate() {
            if occ.has_edge_in(&pool.vertices) {
                rows[l * words_per_row + j / 64] |= 1u64 << (j % 64);
            }
        }
    }
    SeparationMatrix {
        t,
        m,
        words_per_row,
        rows,
    }
}

/// All unordered pairs of identical columns. Empty iff the matrix is
/// separating. Columns are grouped by their packed encoding, so the
/// expected cost is O(t * m) rather than O(t * m^2).
pub fn find_collisions(c: &SeparationMatrix) -> Vec<(usize, usize)> {
    let mut groups: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for j in 0..c.cols() {
        groups.entry(c.column_packed(j)).or_default().push(j);
    }
    let mut pairs = Vec::new();
    for group in groups.values() {
        for a in 0..group.len() {
            for b in a + 1..group.len() {
                pairs.push((group[a], group[b]));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Outcome vector for a planted defective copy: bit l = 1 iff pool l
/// contains an edge of the defective. Equals the defective's matrix column.
pub fn simulate_outcomes(_g: &Graph, pools: &[Pool], defective: &Occurrence) -> Vec<bool> {
    pools
        .iter()
        .map(|pool| defective.has_edge_in(&pool.vertices))
        .collect()
}

/// Column indices consistent with an observed outcome vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub consistent: Vec<usize>,
    pub unique: bool,
}

fn pack_bits(bits: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64).max(1)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            words[i / 64] |= 1u64 << (i % 64);
        }
    }
    words
}

/// All columns exactly equal to the outcome vector. Empty means no copy is
/// consistent (model violation); more than one means the design did not
/// separate those copies.
pub fn decode(c: &SeparationMatrix, outcomes: &[bool]) -> Result<DecodeResult> {
    if outcomes.len() != c.rows() {
        return Err(Error::LengthMismatch {
            expected: c.rows(),
            got: outcomes.len(),
        });
    }
    let target = pack_bits(outcomes);
    let consistent: Vec<usize> = (0..c.cols())
        .filter(|&j| c.column_packed(j) == target)
        .collect();
    let unique = consistent.len() == 1;
    Ok(DecodeResult { consistent, unique })
}

/// A verified separating design plus how many attempts it took.
#[derive(Clone, Debug)]
pub struct SeparatingDesign {
    pub pools: Vec<Pool>,
    pub matrix: SeparationMatrix,
    pub attempts: u64,
}

/// Diagnostics when the retry loop gives up.
#[derive(Clone, Debug)]
pub struct LasVegasFailure {
    pub attempts: u64,
    pub last_collisions: Vec<(usize, usize)>,
    pub suggested_t: usize,
}

/// Resamples t pools (advancing the attempt stream) until the matrix is
/// separating, or gives up after `max_attempts`.
pub fn design_las_vegas(
    g: &Graph,
    occurrences: &[Occurrence],
    p: f64,
    t: usize,
    seed: u64,
    max_attempts: u64,
) -> std::result::Result<SeparatingDesign, Box<LasVegasFailure>> {
    let max_attempts = max_attempts.max(1);
    let mut last_collisions = Vec::new();
    let mut attempts = 0;
    for attempt in 0..max_attempts {
        attempts = attempt + 1;
        let pools = sample_pools_attempt(g, p, t, seed, attempt);
        let matrix = build_matrix(g, &pools, occurrences);
        let collisions = find_collisions(&matrix);
        if collisions.is_empty() {
            return Ok(SeparatingDesign {
                pools,
                matrix,
                attempts,
            });
        }
        last_collisions = collisions;
        if t == 0 {
            break; // resampling zero rows cannot help
        }
    }
    Err(Box::new(LasVegasFailure {
        attempts,
        last_collisions,
        suggested_t: t + t / 2 + 1,
    }))
}

/// On-disk design document (`"schema": 1`).
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct DesignDocument {
    pub schema: u32,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub seed: u64,
    pub p: f64,
    pub pools: Vec<Vec<u32>>,
    /// Row-major bitstrings, one hex string per row (see `row_hex`).
    pub matrix: Vec<String>,
    pub occurrence_digest: String,
    pub occurrences: Vec<OccurrenceRecord>,
}

/// SHA-256 over the canonical occurrence serialization.
pub fn occurrence_digest(occurrences: &[Occurrence]) -> String {
    let mut hasher = Sha256::new();
    for occ in occurrences {
        for &(u, v) in occ.edges() {
            hasher.update(u.to_le_bytes());
            hasher.update(v.to_le_bytes());
        }
        hasher.update([0xff]);
    }
    hex::encode(hasher.finalize())
}

impl DesignDocument {
    pub fn new(
        g: &Graph,
        pools: &[Pool],
        matrix: &SeparationMatrix,
        occurrences: &[Occurrence],
        seed: u64,
        p: f64,
    ) -> Self {
        DesignDocument {
            schema: 1,
            n: g.vertex_count(),
            t: matrix.rows(),
            m: matrix.cols(),
            seed,
            p,
            pools: pools
                .iter()
                .map(|pool| pool.vertices.iter().collect())
                .collect(),
            matrix: (0..matrix.rows()).map(|l| matrix.row_hex(l)).collect(),
            occurrence_digest: occurrence_digest(occurrences),
            occurrences: occurrences.iter().map(OccurrenceRecord::from).collect(),
        }
    }

    /// Rebuilds the packed matrix from the hex rows.
    pub fn matrix_bits(&self) -> Result<SeparationMatrix> {
        let words_per_row = self.m.div_ceil(64).max(1);
        let mut rows = vec![0u64; self.t * words_per_row];
        for (l, row) in self.matrix.iter().enumerate() {
            let bytes = hex::decode(row).map_err(|e| Error::Parse {
                line: l + 1,
                msg: format!("bad hex row: {e}"),
            })?;
            if bytes.len() != self.m.div_ceil(8) {
                return Err(Error::LengthMismatch {
                    expected: self.m.div_ceil(8),
                    got: bytes.len(),
                });
            }
            for j in 0..self.m {
                if bytes[j / 8] >> (7 - j % 8) & 1 == 1 {
                    rows[l * words_per_row + j / 64] |= 1u64 << (j % 64);
                }
            }
        }
        if self.matrix.len() != self.t {
            return Err(Error::LengthMismatch {
                expected: self.t,
                got: self.matrix.len(),
            });
        }
        Ok(SeparationMatrix {
            t: self.t,
            m: self.m,
            words_per_row,
            rows,
        })
    }
}

/// Parses an outcome string of '0'/'1' characters.
pub fn parse_outcomes(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse {
                line: 1,
                msg: format!("outcome characters must be 0 or 1, got {other:?}"),
            }),
        })
        .collect()
}
