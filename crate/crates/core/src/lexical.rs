//! Static lexical lookups: head-word embeddings and synonym sets.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct LexicalResources {
    embeddings: HashMap<String, Vec<f64>>,
    dim: Option<usize>,
    synonyms: HashMap<String, BTreeSet<String>>,
}

impl LexicalResources {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_embedding(&mut self, lemma: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let lemma = lemma.into();
        match self.dim {
            Some(d) if d != vector.len() => {
                return Err(Error::Validation(format!(
                    "embedding for `{lemma}` has dimension {}, expected {d}",
                    vector.len()
                )))
            }
            _ => self.dim = Some(vector.len()),
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("embedding for `{lemma}` is not finite")));
        }
        self.embeddings.insert(lemma, vector);
        Ok(())
    }

    pub fn insert_synonyms<I, S>(&mut self, lemma: impl Into<String>, synonyms: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.synonyms
            .entry(lemma.into())
            .or_default()
            .extend(synonyms.into_iter().map(Into::into));
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dim
    }

    pub fn embedding(&self, lemma: &str) -> Option<&[f64]> {
        self.embeddings.get(lemma).map(Vec::as_slice)
    }

    /// Synonym set of `lemma`, always containing the lemma itself.
    pub fn synonym_set<'a>(&'a self, lemma: &'a str) -> BTreeSet<&'a str> {
        let mut set: BTreeSet<&str> = self
            .synonyms
            .get(lemma)
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect();
        set.insert(lemma);
        set
    }

    /// Embedding cosine clamped to `[0, 1]`. Missing vectors count as zero.
    pub fn embedding_cosine(&self, a: &str, b: &str) -> f64 {
        let (Some(x), Some(y)) = (self.embedding(a), self.embedding(b)) else {
            return 0.0;
        };
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let nx = x.iter().map(|p| p * p).sum::<f64>().sqrt();
        let ny = y.iter().map(|q| q * q).sum::<f64>().sqrt();
        if nx == 0.0 || ny == 0.0 {
            return 0.0;
        }
        (dot / (nx * ny)).clamp(0.0, 1.0)
    }

    pub fn synonym_jaccard(&self, a: &str, b: &str) -> f64 {
        let sa = self.synonym_set(a);
        let sb = self.synonym_set(b);
        let inter = sa.intersection(&sb).count();
        let union = sa.len() + sb.len() - inter;
        inter as f64 / union as f64
    }

    /// Reads `lemma v1 v2 ...` lines.
    pub fn read_embeddings(&mut self, reader: impl BufRead, path: &Path) -> Result<()> {
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(lemma) = fields.next() else { continue };
            let vector = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    path: path.to_owned(),
                    line: n + 1,
                    message: e.to_string(),
                })?;
            self.insert_embedding(lemma, vector).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Reads `lemma<TAB>syn1,syn2,...` lines.
    pub fn read_synonyms(&mut self, reader: impl BufRead, path: &Path) -> Result<()> {
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (lemma, rest) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                message: "expected lemma<TAB>synonyms".into(),
            })?;
            self.insert_synonyms(
                lemma.trim(),
                rest.split(',').map(str::trim).filter(|s| !s.is_empty()),
            );
        }
        Ok(())
    }

    /// Loads either file, skipping the ones not given.
    pub fn load(embeddings: Option<&Path>, synonyms: Option<&Path>) -> Result<Self> {
        let mut r = Self::new();
        if let Some(p) = embeddings {
            r.read_embeddings(std::io::BufReader::new(std::fs::File::open(p)?), p)?;
        }
        if let Some(p) = synonyms {
            r.read_synonyms(std::io::BufReader::new(std::fs::File::open(p)?), p)?;
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_dimensions_rejected() {
        let text = "a 1 0 0\nb 1 0\n";
        let mut r = LexicalResources::new();
        let err = r.read_embeddings(text.as_bytes(), Path::new("e.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn negative_cosine_clamps_to_zero() {
        let mut r = LexicalResources::new();
        r.insert_embedding("a", vec![1.0, 0.0]).unwrap();
        r.insert_embedding("b", vec![-1.0, 0.1]).unwrap();
        assert_eq!(r.embedding_cosine("a", "b"), 0.0);
        assert_eq!(r.embedding_cosine("a", "oov"), 0.0);
    }

    #[test]
    fn jaccard_includes_head() {
        let mut r = LexicalResources::new();
        r.read_synonyms("attack\tassault, onslaught\nassault\tattack\n".as_bytes(), Path::new("s"))
            .unwrap();
        // {attack, assault, onslaught} vs {assault, attack}
        assert!((r.synonym_jaccard("attack", "assault") - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.synonym_jaccard("x", "x"), 1.0);
        assert_eq!(r.synonym_jaccard("x", "y"), 0.0);
    }
}
