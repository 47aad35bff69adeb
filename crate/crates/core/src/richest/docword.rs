//! Sparse document-term counts and the UCI bag-of-words reader.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Term counts stored as `(doc, term, count)` triplets sorted by document
/// then term, with no duplicate pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    n_docs: usize,
    n_terms: usize,
    triplets: Vec<(usize, usize, u64)>,
    doc_totals: Vec<u64>,
}

impl DocTermMatrix {
    /// Validates and merges raw triplets (0-indexed); duplicate pairs are
    /// summed.
    pub fn from_triplets(
        n_docs: usize,
        n_terms: usize,
        mut triplets: Vec<(usize, usize, u64)>,
    ) -> Result<Self> {
        for &(d, t, c) in &triplets {
            if d >= n_docs {
                return Err(Error::IndexOutOfRange { index: d, len: n_docs });
            }
            if t >= n_terms {
                return Err(Error::IndexOutOfRange { index: t, len: n_terms });
            }
            if c == 0 {
                return Err(Error::InvalidConfig(format!(
                    "zero count for document {d}, term {t}"
                )));
            }
        }
        triplets.sort_unstable_by_key(|&(d, t, _)| (d, t));
        let mut merged: Vec<(usize, usize, u64)> = Vec::with_capacity(triplets.len());
        for (d, t, c) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == d && last.1 == t => last.2 += c,
                _ => merged.push((d, t, c)),
            }
        }
        let mut doc_totals = vec![0; n_docs];
        for &(d, _, c) in &merged {
            doc_totals[d] += c;
        }
        Ok(DocTermMatrix {
            n_docs,
            n_terms,
            triplets: merged,
            doc_totals,
        })
    }

    /// Builds from dense rows of counts.
    pub fn from_dense(rows: &[Vec<u64>]) -> Result<Self> {
        let n_terms = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (d, row) in rows.iter().enumerate() {
            if row.len() != n_terms {
                return Err(Error::DimensionMismatch {
                    expected: n_terms,
                    got: row.len(),
                });
            }
            triplets.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(t, &c)| (d, t, c)),
            );
        }
        Self::from_triplets(rows.len(), n_terms, triplets)
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, u64)] {
        &self.triplets
    }

    pub fn doc_totals(&self) -> &[u64] {
        &self.doc_totals
    }

    pub fn total_tokens(&self) -> u64 {
        self.doc_totals.iter().sum()
    }

    /// Per-term totals over all documents.
    pub fn term_totals(&self) -> Vec<u64> {
        let mut out = vec![0; self.n_terms];
        for &(_, t, c) in &self.triplets {
            out[t] += c;
        }
        out
    }

    /// Drops terms that never occur. Returns the compacted matrix and, for
    /// each kept column, its original term id.
    pub fn compact_terms(&self) -> (DocTermMatrix, Vec<usize>) {
        let totals = self.term_totals();
        let kept: Vec<usize> = (0..self.n_terms).filter(|&t| totals[t] > 0).collect();
        let mut remap = vec![usize::MAX; self.n_terms];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let triplets = self
            .triplets
            .iter()
            .map(|&(d, t, c)| (d, remap[t], c))
            .collect();
        let m = DocTermMatrix {
            n_docs: self.n_docs,
            n_terms: kept.len(),
            triplets,
            doc_totals: self.doc_totals.clone(),
        };
        (m, kept)
    }

    /// Relabels term `t` as `perm[t]`.
    pub fn permute_terms(&self, perm: &[usize]) -> Result<DocTermMatrix> {
        let mut seen = vec![false; self.n_terms];
        if perm.len() != self.n_terms
            || perm.iter().any(|&p| p >= self.n_terms || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidConfig("not a permutation of the term ids".into()));
        }
        let triplets = self.triplets.iter().map(|&(d, t, c)| (d, perm[t], c)).collect();
        Self::from_triplets(self.n_docs, self.n_terms, triplets)
    }

    /// Writes the UCI docword layout (1-indexed).
    pub fn to_docword(&self) -> String {
        let mut out = format!("{}\n{}\n{}\n", self.n_docs, self.n_terms, self.nnz());
        for &(d, t, c) in &self.triplets {
            out.push_str(&format!("{} {} {}\n", d + 1, t + 1, c));
        }
        out
    }
}

fn parse_field(line: usize, field: Option<&str>, what: &str) -> Result<u64> {
    let s = field.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} '{s}'"),
    })
}

/// Reads the UCI bag-of-words layout: three header lines `D`, `W`, `NNZ`
/// followed by `docID wordID count` lines with 1-indexed ids. Blank lines
/// are ignored.
pub fn load_docword<R: BufRead>(reader: R) -> Result<DocTermMatrix> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| {
            l.map(|s| (i + 1, s)).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .filter(|r| r.as_ref().map_or(true, |(_, s)| !s.trim().is_empty()));

    let mut header = [0u64; 3];
    for (slot, name) in header.iter_mut().zip(["document count", "vocabulary size", "NNZ"]) {
        let (line, text) = lines.next().transpose()?.ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("header ended before the {name}"),
        })?;
        let mut fields = text.split_whitespace();
        *slot = parse_field(line, fields.next(), name)?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("expected a single {name}"),
            });
        }
    }
    let [n_docs, n_terms, nnz] = header.map(|v| v as usize);

    let mut triplets = Vec::with_capacity(nnz);
    for item in lines {
        let (line, text) = item?;
        let mut fields = text.split_whitespace();
        let d = parse_field(line, fields.next(), "document id")? as usize;
        let t = parse_field(line, fields.next(), "word id")? as usize;
        let c = parse_field(line, fields.next(), "count")?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line,
                msg: "expected three fields".into(),
            });
        }
        if d == 0 || d > n_docs {
            return Err(Error::Parse {
                line,
                msg: format!("document id {d} outside 1..={n_docs}"),
            });
        }
        if t == 0 || t > n_terms {
            return Err(Error::Parse {
                line,
                msg: format!("word id {t} outside 1..={n_terms}"),
            });
        }
        if c == 0 {
            return Err(Error::Parse {
                line,
                msg: "count must be positive".into(),
            });
        }
        triplets.push((d - 1, t - 1, c));
    }
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: 3,
            msg: format!("header declares NNZ = {nnz} but {} entries follow", triplets.len()),
        });
    }
    DocTermMatrix::from_triplets(n_docs, n_terms, triplets)
}
