//! Pretrained word vectors in the GloVe text format (`word c1 c2 ... cD`).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding file {0} is empty")]
    Empty(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse component {token:?}")]
    BadComponent { line: usize, token: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            vectors: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    /// Parses the text format; the first line fixes the dimension.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, EmbeddingError> {
        let mut table: Option<Self> = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = fields
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| EmbeddingError::BadComponent {
                        line: i + 1,
                        token: tok.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let table = table.get_or_insert_with(|| Self::new(values.len()));
            if values.len() != table.dimension || values.is_empty() {
                return Err(EmbeddingError::DimensionMismatch {
                    line: i + 1,
                    expected: table.dimension,
                    found: values.len(),
                });
            }
            table.vectors.insert(word.to_string(), values);
        }
        table.ok_or_else(|| EmbeddingError::Empty("<reader>".into()))
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let file = File::open(path)?;
        Self::from_reader(BufReader::new(file)).map_err(|e| match e {
            EmbeddingError::Empty(_) => EmbeddingError::Empty(path.display().to_string()),
            other => other,
        })
    }

    /// Returns the stored vector, or draws a fresh one uniformly from
    /// `[-1, 1]` and remembers it.
    pub fn lookup_or_init<R: Rng + ?Sized>(&mut self, word: &str, rng: &mut R) -> &[f64] {
        let dim = self.dimension;
        self.vectors
            .entry(word.to_string())
            .or_insert_with(|| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_two_words() {
        let t = EmbeddingTable::from_reader("a 1.0 2.0\nb 3.0 4.0".as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.get("b"), Some(&[3.0, 4.0][..]));
    }

    #[test]
    fn rejects_mismatch_and_empty() {
        let err = EmbeddingTable::from_reader("a 1.0 2.0\nb 1 2 3".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::DimensionMismatch { line: 2, expected: 2, found: 3 }));
        assert!(matches!(EmbeddingTable::from_reader("".as_bytes()), Err(EmbeddingError::Empty(_))));
        assert!(matches!(
            EmbeddingTable::from_reader("a 1.0 x".as_bytes()),
            Err(EmbeddingError::BadComponent { line: 1, .. })
        ));
    }

    #[test]
    fn oov_is_memoized_and_reproducible() {
        let mut t = EmbeddingTable::from_reader("known 0.5 -0.5 0.25".as_bytes()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(t.lookup_or_init("known", &mut rng), &[0.5, -0.5, 0.25]);
        let first = t.lookup_or_init("unseen", &mut rng).to_vec();
        assert_eq!(t.lookup_or_init("unseen", &mut rng), first.as_slice());
        assert!(first.iter().all(|x| (-1.0..=1.0).contains(x)));

        let mut again = EmbeddingTable::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(again.lookup_or_init("unseen", &mut rng), first.as_slice());
    }

    #[test]
    fn oov_draws_look_uniform() {
        let mut t = EmbeddingTable::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..10_000).map(|i| t.lookup_or_init(&format!("w{i}"), &mut rng)[0]).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!(draws.iter().all(|x| (-1.0..=1.0).contains(x)));
        // Var of U(-1, 1) is 1/3.
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!((var - 1.0 / 3.0).abs() < 0.02, "var {var}");
    }
}
