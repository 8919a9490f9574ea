//! Weighted-graph and edge-stream substrate with pass counting and
//! peak-space accounting.
//!
//! A stream is an immutable edge sequence that can be replayed any number of
//! times; every full traversal bumps the shared pass counter. Space is
//! accounted in "words" (stored scalars and ids), not bytes: the
//! semi-streaming budget is a cost model, so enforcement is assertion-based.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// A weighted undirected edge. Endpoints are dense 0-based node ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Edge { u, v, w }
    }

    /// Canonical unordered key.
    pub fn key(&self) -> (usize, usize) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

/// Replayable edge sequence. Multiple readers may traverse concurrently;
/// each holds its own cursor and exhaustions increment a shared counter.
#[derive(Debug, Clone)]
pub struct EdgeStream {
    edges: Arc<Vec<Edge>>,
    n: usize,
    passes: Arc<AtomicU64>,
}

impl EdgeStream {
    /// Build a stream from in-memory edges. Rejects self-loops, negative
    /// weights and duplicate unordered pairs.
    pub fn from_edges(edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut n = 0usize;
        for (idx, e) in edges.iter().enumerate() {
            if e.u == e.v {
                return Err(Error::SelfLoop {
                    line: idx + 1,
                    node: e.u,
                });
            }
            if e.w < 0.0 || !e.w.is_finite() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("negative or non-finite weight {}", e.w),
                });
            }
            if !seen.insert(e.key()) {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("duplicate edge {{{}, {}}}", e.u, e.v),
                });
            }
            n = n.max(e.u + 1).max(e.v + 1);
        }
        Ok(EdgeStream {
            edges: Arc::new(edges),
            n,
            passes: Arc::new(AtomicU64::new(0)),
        })
    }

    /// Parse the edge-list text format: one `u v w` per line, whitespace
    /// separated, `#` comments ignored, `w` optional (defaults to 1.0).
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let toks: Vec<&str> = stripped.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() < 2 || toks.len() > 3 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 'u v [w]', got {:?}", raw),
                });
            }
            let u: usize = toks[0].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad node id {:?}", toks[0]),
            })?;
            let v: usize = toks[1].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad node id {:?}", toks[1]),
            })?;
            let w: f64 = if toks.len() == 3 {
                toks[2].parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad weight {:?}", toks[2]),
                })?
            } else {
                1.0
            };
            if u == v {
                return Err(Error::SelfLoop { line, node: u });
            }
            if w < 0.0 || !w.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("negative or non-finite weight {}", w),
                });
            }
            edges.push(Edge::new(u, v, w));
        }
        Self::from_edges(edges)
    }

    /// Read and parse an edge-list file.
    pub fn open(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Permute the stored edge order once with a seeded shuffle. Replays
    /// after this remain deterministic.
    pub fn with_adversarial_order(mut self, seed: u64) -> Self {
        let mut edges = (*self.edges).clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        edges.shuffle(&mut rng);
        self.edges = Arc::new(edges);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Completed full traversals so far.
    pub fn pass_count(&self) -> u64 {
        self.passes.load(Ordering::SeqCst)
    }

    /// Start a traversal. The pass counter increments only when the reader
    /// is driven to exhaustion; abandoned partial traversals do not count.
    pub fn next_pass(&self) -> PassIter<'_> {
        PassIter {
            stream: self,
            idx: 0,
            counted: false,
        }
    }

    /// Direct slice access for in-memory consumers that have charged the
    /// ledger for caching the edge list.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
}

/// Single traversal cursor over an [`EdgeStream`].
pub struct PassIter<'a> {
    stream: &'a EdgeStream,
    idx: usize,
    counted: bool,
}

impl Iterator for PassIter<'_> {
    type Item = Edge;

    fn next(&mut self) -> Option<Edge> {
        if self.idx < self.stream.edges.len() {
            let e = self.stream.edges[self.idx];
            self.idx += 1;
            Some(e)
        } else {
            if !self.counted {
                self.counted = true;
                self.stream.passes.fetch_add(1, Ordering::SeqCst);
            }
            None
        }
    }
}

/// Pass and peak-space ledger. `peak_words` is the high-water mark of
/// stored scalars/ids and is monotone nondecreasing.
#[derive(Debug, Clone, Default)]
pub struct ResourceLedger {
    pub passes: u64,
    current_words: i64,
    pub peak_words: i64,
}

impl ResourceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charge (or release, with negative `delta`) `delta` words.
    pub fn charge(&mut self, delta: i64) -> Result<()> {
        let next = self.current_words + delta;
        if next < 0 {
            return Err(Error::Accounting {
                current: self.current_words,
                delta,
            });
        }
        self.current_words = next;
        self.peak_words = self.peak_words.max(next);
        Ok(())
    }

    pub fn current_words(&self) -> i64 {
        self.current_words
    }

    /// Record completed passes observed from a stream.
    pub fn set_passes(&mut self, passes: u64) {
        self.passes = passes;
    }

    /// Merge a concurrent pipeline's private ledger: passes add up, the
    /// peak is the maximum of peaks.
    pub fn merge(&mut self, other: &ResourceLedger) {
        self.passes += other.passes;
        self.peak_words = self.peak_words.max(other.peak_words);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic() {
        let s = EdgeStream::parse("0 1 1.0\n1 2 2.0").unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.m(), 2);
    }

    #[test]
    fn parse_empty() {
        let s = EdgeStream::parse("").unwrap();
        assert_eq!(s.n(), 0);
        assert_eq!(s.m(), 0);
    }

    #[test]
    fn parse_self_loop_rejected() {
        let err = EdgeStream::parse("0 0 1.0").unwrap_err();
        assert!(matches!(err, Error::SelfLoop { line: 1, node: 0 }));
    }

    #[test]
    fn parse_default_weight_and_comments() {
        let s = EdgeStream::parse("# header\n0 1\n2 3 4.5 # trailing").unwrap();
        assert_eq!(s.m(), 2);
        assert_eq!(s.edges()[0].w, 1.0);
        assert_eq!(s.edges()[1].w, 4.5);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = EdgeStream::parse("0 1 1.0\nnot an edge").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pass_counting_semantics() {
        let s = EdgeStream::parse("0 1 1.0\n1 2 2.0").unwrap();
        assert_eq!(s.pass_count(), 0);
        let collected: Vec<_> = s.next_pass().collect();
        assert_eq!(collected.len(), 2);
        assert_eq!(s.pass_count(), 1);
        let _ = s.next_pass().collect::<Vec<_>>();
        assert_eq!(s.pass_count(), 2);
        // partial traversal abandoned: counter unchanged
        let mut it = s.next_pass();
        let _ = it.next();
        drop(it);
        assert_eq!(s.pass_count(), 2);
    }

    #[test]
    fn replay_determinism() {
        let s = EdgeStream::parse("0 1 1.0\n1 2 2.0\n0 2 0.5")
            .unwrap()
            .with_adversarial_order(7);
        let a: Vec<_> = s.next_pass().collect();
        let b: Vec<_> = s.next_pass().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn ledger_peak_semantics() {
        let mut l = ResourceLedger::new();
        l.charge(10).unwrap();
        l.charge(-10).unwrap();
        assert_eq!(l.peak_words, 10);
        let mut l2 = ResourceLedger::new();
        l2.charge(5).unwrap();
        l2.charge(5).unwrap();
        assert_eq!(l2.peak_words, 10);
        let mut l3 = ResourceLedger::new();
        assert!(l3.charge(-1).is_err());
    }

    #[test]
    fn ledger_merge() {
        let mut a = ResourceLedger::new();
        a.passes = 3;
        a.charge(100).unwrap();
        let mut b = ResourceLedger::new();
        b.passes = 2;
        b.charge(40).unwrap();
        a.merge(&b);
        assert_eq!(a.passes, 5);
        assert_eq!(a.peak_words, 100);
    }
}
