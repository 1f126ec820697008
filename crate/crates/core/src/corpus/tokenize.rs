//! Word tokenization and sentence splitting.
//!
//! The tokenizer lowercases, keeps maximal alphanumeric runs together and
//! turns every other non-whitespace character into a standalone token. It
//! is deterministic and idempotent on re-joined output.

/// A token plus its `[start, end)` character range in the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub token: String,
    pub start: usize,
    pub end: usize,
}

/// Tokenizes with character offsets into the original (uncased) text.
pub fn tokenize_with_offsets(text: &str) -> Vec<TokenSpan> {
    let mut spans: Vec<TokenSpan> = Vec::new();
    let mut run = String::new();
    let mut run_start = 0;
    for (i, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if run.is_empty() {
                run_start = i;
            }
            run.extend(ch.to_lowercase());
        } else {
            if !run.is_empty() {
                spans.push(TokenSpan {
                    token: std::mem::take(&mut run),
                    start: run_start,
                    end: i,
                });
            }
            if !ch.is_whitespace() {
                spans.push(TokenSpan {
                    token: ch.to_lowercase().collect(),
                    start: i,
                    end: i + 1,
                });
            }
        }
    }
    if !run.is_empty() {
        let end = text.chars().count();
        spans.push(TokenSpan {
            token: run,
            start: run_start,
            end,
        });
    }
    spans
}

/// Lowercased whitespace/punctuation tokenization. Empty input gives an
/// empty sequence.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_offsets(text)
        .into_iter()
        .map(|s| s.token)
        .collect()
}

/// Joins tokens with single spaces.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Splits text into sentences on runs of `.`, `!` or `?` followed by
/// whitespace. Returns trimmed, non-empty sentences.
pub fn split_sentences(text: &str) -> Vec<String> {
    split_sentences_with_offsets(text)
        .into_iter()
        .map(|(s, _)| s)
        .collect()
}

/// Sentence splitting that also reports each sentence's starting character
/// offset in the original text.
pub fn split_sentences_with_offsets(text: &str) -> Vec<(String, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            let mut j = i;
            while j + 1 < chars.len() && matches!(chars[j + 1], '.' | '!' | '?') {
                j += 1;
            }
            if j + 1 >= chars.len() || chars[j + 1].is_whitespace() {
                push_sentence(&chars, start, j + 1, &mut sentences);
                start = j + 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    push_sentence(&chars, start, chars.len(), &mut sentences);
    sentences
}

fn push_sentence(chars: &[char], start: usize, end: usize, out: &mut Vec<(String, usize)>) {
    let mut s = start;
    while s < end && chars[s].is_whitespace() {
        s += 1;
    }
    let mut e = end;
    while e > s && chars[e - 1].is_whitespace() {
        e -= 1;
    }
    if e > s {
        out.push((chars[s..e].iter().collect(), s));
    }
}
