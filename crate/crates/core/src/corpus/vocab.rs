//! Token vocabulary with optional pretrained embedding rows.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{read_to_string, tokenize, Dataset};
use crate::error::{Error, Result};

/// Reserved index for padding; never assigned to a real token.
pub const PAD_INDEX: usize = 0;
/// Reserved index for out-of-vocabulary tokens.
pub const UNK_INDEX: usize = 1;

const PAD_TOKEN: &str = "<pad>";
const UNK_TOKEN: &str = "<unk>";

/// Injective token → index map with index 0 reserved for padding and 1 for
/// unknown, plus an optional `[vocab_size × embedding_dim]` matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub embedding_dim: usize,
    #[serde(skip, default)]
    pub embeddings: Option<Array2<f64>>,
}

impl Vocab {
    /// Builds a vocabulary from the tokens of the given datasets, keeping
    /// tokens with frequency ≥ `min_freq`. If an embedding file is given,
    /// matching rows are taken from it and the remaining rows are drawn
    /// uniformly from [-0.1, 0.1] with the given seed.
    pub fn build(
        datasets: &[&Dataset],
        min_freq: usize,
        embedding_dim: usize,
        embedding_source: Option<&Path>,
        seed: u64,
    ) -> Result<Vocab> {
        if min_freq < 1 {
            return Err(Error::Config("min_freq must be ≥ 1".to_string()));
        }
        if embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".to_string()));
        }
        let mut freq: HashMap<String, usize> = HashMap::new();
        for ds in datasets {
            for ex in &ds.examples {
                let mut bump = |tokens: &[String]| {
                    for t in tokens {
                        *freq.entry(t.clone()).or_insert(0) += 1;
                    }
                };
                bump(&ex.question_tokens);
                for doc in &ex.documents {
                    for sent in &doc.sentences {
                        bump(&sent.tokens);
                    }
                }
                for answer in &ex.answers {
                    bump(&tokenize(answer));
                }
                if let Some(cands) = &ex.candidates {
                    for c in cands {
                        bump(&tokenize(c));
                    }
                }
            }
        }
        let mut kept: Vec<(String, usize)> = freq
            .into_iter()
            .filter(|(_, n)| *n >= min_freq)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        tokens.extend(kept.into_iter().map(|(t, _)| t));
        let mut vocab = Vocab {
            index: build_index(&tokens),
            tokens,
            embedding_dim,
            embeddings: None,
        };
        if let Some(path) = embedding_source {
            vocab.embeddings = Some(vocab.load_embeddings(path, seed)?);
        }
        Ok(vocab)
    }

    fn load_embeddings(&self, path: &Path, seed: u64) -> Result<Array2<f64>> {
        let text = read_to_string(path)?;
        let mut pretrained: HashMap<&str, Vec<f64>> = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap();
            let values: Vec<f64> = fields
                .map(|v| {
                    v.parse::<f64>().map_err(|_| {
                        Error::Data(format!(
                            "{}: bad embedding value on line {}",
                            path.display(),
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != self.embedding_dim {
                return Err(Error::Config(format!(
                    "embedding file dimension {} does not match configured embedding_dim {}",
                    values.len(),
                    self.embedding_dim
                )));
            }
            pretrained.insert(token, values);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrix = Array2::zeros((self.size(), self.embedding_dim));
        for (i, token) in self.tokens.iter().enumerate() {
            if i == PAD_INDEX {
                continue; // padding row stays zero
            }
            match pretrained.get(token.as_str()) {
                Some(row) => {
                    for (j, v) in row.iter().enumerate() {
                        matrix[(i, j)] = *v;
                    }
                }
                None => {
                    for j in 0..self.embedding_dim {
                        matrix[(i, j)] = rng.random_range(-0.1..0.1);
                    }
                }
            }
        }
        Ok(matrix)
    }

    /// Total lookup: unknown tokens map to [`UNK_INDEX`].
    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.lookup(t)).collect()
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    /// Rebuilds the lookup map after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = build_index(&self.tokens);
    }

    /// Restores a vocabulary from its token list (checkpoint loading path).
    pub fn from_tokens(tokens: Vec<String>, embedding_dim: usize) -> Vocab {
        Vocab {
            index: build_index(&tokens),
            tokens,
            embedding_dim,
            embeddings: None,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

fn build_index(tokens: &[String]) -> HashMap<String, usize> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{QAExample, SentenceRecord, Split, Supervision};

    fn tiny_dataset(sentences: &[&str]) -> Dataset {
        let doc = crate::corpus::DocumentRecord {
            title: String::new(),
            sentences: sentences
                .iter()
                .enumerate()
                .map(|(i, s)| SentenceRecord {
                    doc_index: 0,
                    sent_index: i,
                    text: s.to_string(),
                    tokens: tokenize(s),
                    contains_answer: false,
                    is_supporting_fact: None,
                })
                .collect(),
        };
        Dataset {
            name: "tiny".to_string(),
            split: Split::Train,
            examples: vec![QAExample {
                id: "e0".to_string(),
                question_raw: "q".to_string(),
                question_tokens: vec!["q".to_string()],
                query_relation: None,
                query_head: None,
                answers: vec!["a".to_string()],
                candidates: None,
                documents: vec![doc],
                gold_span: None,
                answer_occurrences: None,
                supervision: Supervision::Span,
                non_extractive: false,
                unanswerable: false,
            }],
        }
    }

    #[test]
    fn min_freq_filters_rare_tokens() {
        let ds = tiny_dataset(&["a a a a a b"]);
        let vocab = Vocab::build(&[&ds], 2, 4, None, 0).unwrap();
        assert_ne!(vocab.lookup("a"), UNK_INDEX);
        assert_eq!(vocab.lookup("b"), UNK_INDEX);
    }

    #[test]
    fn unseen_token_maps_to_unk() {
        let ds = tiny_dataset(&["alpha beta"]);
        let vocab = Vocab::build(&[&ds], 1, 4, None, 0).unwrap();
        assert_eq!(vocab.lookup("never-seen"), UNK_INDEX);
        assert_eq!(vocab.lookup("<pad>"), PAD_INDEX);
    }

    #[test]
    fn lookup_is_total_and_pad_is_reserved() {
        let ds = tiny_dataset(&["x y z x"]);
        let vocab = Vocab::build(&[&ds], 1, 4, None, 0).unwrap();
        for t in ["x", "y", "z", "q", "a", "unheard"] {
            let idx = vocab.lookup(t);
            assert!(idx < vocab.size());
            if !["<pad>"].contains(&t) {
                assert_ne!(idx, PAD_INDEX, "pad index leaked to token {t}");
            }
        }
    }
}
