//! Answer matching: decides whether a token window contains an answer.

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, QAExample, SpanAddress};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Compare tokens verbatim.
    Exact,
    /// Lowercase and strip leading/trailing punctuation from each token;
    /// tokens that normalize to nothing are dropped.
    #[default]
    LowercasePunctStripped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerMatcher {
    pub normalization: Normalization,
}

impl AnswerMatcher {
    pub fn exact() -> AnswerMatcher {
        AnswerMatcher {
            normalization: Normalization::Exact,
        }
    }

    fn normalize_token(&self, token: &str) -> Option<String> {
        match self.normalization {
            Normalization::Exact => Some(token.to_string()),
            Normalization::LowercasePunctStripped => {
                let stripped: String = token
                    .to_lowercase()
                    .trim_matches(|c: char| !c.is_alphanumeric())
                    .to_string();
                if stripped.is_empty() {
                    None
                } else {
                    Some(stripped)
                }
            }
        }
    }

    /// Normalized tokens paired with their index in the raw sequence.
    fn normalized_with_positions<'a, I>(&self, tokens: I) -> Vec<(String, usize)>
    where
        I: IntoIterator<Item = &'a str>,
    {
        tokens
            .into_iter()
            .enumerate()
            .filter_map(|(i, t)| self.normalize_token(t).map(|n| (n, i)))
            .collect()
    }

    /// Normalized token sequence of an answer string.
    pub fn normalize_answer(&self, answer: &str) -> Vec<String> {
        tokenize(answer)
            .iter()
            .filter_map(|t| self.normalize_token(t))
            .collect()
    }

    /// Whole-string equality under the matcher's normalization.
    pub fn strings_match(&self, a: &str, b: &str) -> bool {
        self.normalize_answer(a) == self.normalize_answer(b)
    }

    /// All raw-index spans `[start, end]` (inclusive) where the answer
    /// occurs in the token stream, in left-to-right order.
    pub fn occurrences<'a, I>(&self, tokens: I, answer: &str) -> Vec<(usize, usize)>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let needle = self.normalize_answer(answer);
        if needle.is_empty() {
            return Vec::new();
        }
        let haystack = self.normalized_with_positions(tokens);
        let mut out = Vec::new();
        if haystack.len() < needle.len() {
            return out;
        }
        for i in 0..=haystack.len() - needle.len() {
            if (0..needle.len()).all(|j| haystack[i + j].0 == needle[j]) {
                out.push((haystack[i].1, haystack[i + needle.len() - 1].1));
            }
        }
        out
    }
}

/// True iff the normalized answer tokens occur contiguously in the
/// normalized window.
pub fn answer_matches(window: &[String], answer: &str, matcher: &AnswerMatcher) -> bool {
    !matcher
        .occurrences(window.iter().map(String::as_str), answer)
        .is_empty()
}

/// Flags `contains_answer` on every sentence where any answer matches and
/// returns the relabeled example. When no sentence matches, the example is
/// flagged `unanswerable` instead; callers decide whether to skip it or
/// count it wrong.
pub fn label_answer_sentences(example: &QAExample, matcher: &AnswerMatcher) -> QAExample {
    let mut out = example.clone();
    let mut any = false;
    for doc in &mut out.documents {
        for sent in &mut doc.sentences {
            sent.contains_answer = out
                .answers
                .iter()
                .any(|a| answer_matches(&sent.tokens, a, matcher));
            any |= sent.contains_answer;
        }
    }
    out.unanswerable = !any;
    out
}

/// Every occurrence of any answer across the example's documents, in
/// document order then position order.
pub fn locate_answer_occurrences(example: &QAExample, matcher: &AnswerMatcher) -> Vec<SpanAddress> {
    let mut spans = Vec::new();
    for (d, doc) in example.documents.iter().enumerate() {
        let tokens: Vec<&str> = doc.tokens().collect();
        for answer in &example.answers {
            for (start, end) in matcher.occurrences(tokens.iter().copied(), answer) {
                spans.push(SpanAddress { doc: d, start, end });
            }
        }
    }
    spans.sort();
    spans.dedup();
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn contains_full_mention() {
        let m = AnswerMatcher::default();
        assert!(answer_matches(
            &toks(&["the", "oberoi", "group"]),
            "Oberoi Group",
            &m
        ));
    }

    #[test]
    fn partial_mention_does_not_match() {
        let m = AnswerMatcher::default();
        assert!(!answer_matches(&toks(&["oberoi"]), "Oberoi Group", &m));
    }

    #[test]
    fn punctuation_tokens_are_transparent() {
        let m = AnswerMatcher::default();
        assert!(answer_matches(
            &toks(&["delhi", ",", "india"]),
            "Delhi India",
            &m
        ));
    }

    #[test]
    fn exact_mode_is_case_sensitive() {
        let m = AnswerMatcher::exact();
        assert!(!answer_matches(&toks(&["Delhi"]), "delhi city", &m));
        assert!(answer_matches(&toks(&["delhi"]), "delhi", &m));
    }

    #[test]
    fn empty_answer_matches_nothing() {
        let m = AnswerMatcher::default();
        assert!(!answer_matches(&toks(&["a", "b"]), "", &m));
        assert!(!answer_matches(&toks(&["a", "b"]), "...", &m));
    }

    #[test]
    fn occurrence_spans_cover_raw_positions() {
        let m = AnswerMatcher::default();
        let tokens = ["x", "delhi", ",", "india", "y", "delhi", "india"];
        let occ = m.occurrences(tokens.iter().copied(), "Delhi India");
        assert_eq!(occ, vec![(1, 3), (5, 6)]);
    }
}
