//! Rule-based sentence segmentation.
//!
//! A sentence ends at '.', '!' or '?' (plus any immediately following
//! closing quotes/brackets or further terminators) when the terminator is
//! followed by whitespace or end of text. Two guards apply to periods only:
//! the word before the period must not be a known abbreviation, and the
//! next sentence must not start with a lowercase letter. '!' and '?' always
//! split. The spans cover all non-whitespace input, so joining the output
//! reproduces the input modulo whitespace.

/// Abbreviations that never end a sentence, compared lowercase and without
/// the final period ("e.g." is stored as "e.g").
pub const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "lt", "col", "gen", "rev", "hon", "etc",
    "e.g", "i.e", "cf", "vs", "al", "fig", "figs", "eq", "eqs", "sec", "ca", "approx", "dept",
    "inc", "ltd", "co", "corp", "u.s", "u.k", "ph.d", "b.c", "a.d", "vol", "pp", "ed", "eds",
];

const TERMINATORS: [char; 3] = ['.', '!', '?'];
const TRAILERS: [char; 5] = ['"', '\'', ')', ']', '\u{201d}'];

fn is_terminator(c: char) -> bool {
    TERMINATORS.contains(&c)
}

fn is_trailer(c: char) -> bool {
    TRAILERS.contains(&c)
}

/// The chunk of non-whitespace text immediately before byte index `end`,
/// stripped of leading punctuation, lowercased.
fn word_before(text: &str, end: usize) -> String {
    let prefix = &text[..end];
    let start = prefix
        .char_indices()
        .rev()
        .take_while(|(_, c)| !c.is_whitespace())
        .last()
        .map(|(i, _)| i)
        .unwrap_or(end);
    prefix[start..]
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Byte spans of the sentences in `text`, in order, untrimmed.
pub(crate) fn segment_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < n {
        let (idx, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        // Absorb a run of terminators and closing quotes/brackets.
        let mut j = i + 1;
        while j < n && (is_terminator(chars[j].1) || is_trailer(chars[j].1)) {
            j += 1;
        }
        let end = if j < n { chars[j].0 } else { text.len() };
        let at_eot = j >= n;
        let next_char = if at_eot { None } else { Some(chars[j].1) };
        let followed_by_space = next_char.map_or(true, |c| c.is_whitespace());
        let mut split = followed_by_space;
        if split && c == '.' {
            if ABBREVIATIONS.contains(&word_before(text, idx).as_str()) {
                split = false;
            } else if !at_eot {
                // Peek at the first non-whitespace character after the gap.
                let upcoming = chars[j..]
                    .iter()
                    .map(|&(_, c)| c)
                    .find(|c| !c.is_whitespace());
                if let Some(u) = upcoming {
                    if u.is_lowercase() {
                        split = false;
                    }
                }
            }
        }
        if split {
            if text[start..end].trim().is_empty() {
                // Nothing but whitespace since the last boundary; fold the
                // stray terminators into the previous sentence if any.
                if let Some(last) = spans.last_mut() {
                    last.1 = end;
                }
            } else {
                spans.push((start, end));
            }
            // Skip whitespace to the start of the next sentence.
            let mut k = j;
            while k < n && chars[k].1.is_whitespace() {
                k += 1;
            }
            start = if k < n { chars[k].0 } else { text.len() };
            i = k;
        } else {
            i = j.max(i + 1);
        }
    }
    if start < text.len() && !text[start..].trim().is_empty() {
        spans.push((start, text.len()));
    }
    spans
}

/// Deterministic sentence split. Returns trimmed, non-empty sentences whose
/// concatenation equals the input modulo whitespace.
pub fn segment_sentences(text: &str) -> Vec<String> {
    segment_spans(text)
        .into_iter()
        .map(|(s, e)| text[s..e].trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminator_forced_splits() {
        assert_eq!(segment_sentences("A. B? C!"), vec!["A.", "B?", "C!"]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(
            segment_sentences("Dr. Smith left. He returned."),
            vec!["Dr. Smith left.", "He returned."]
        );
    }

    #[test]
    fn empty_input() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("   ").is_empty());
    }

    #[test]
    fn decimal_numbers_do_not_split() {
        assert_eq!(
            segment_sentences("It weighs 3.5 kg. It is heavy."),
            vec!["It weighs 3.5 kg.", "It is heavy."]
        );
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(
            segment_sentences("Born in approx. twenty years ago. Next one."),
            vec!["Born in approx. twenty years ago.", "Next one."]
        );
    }

    #[test]
    fn closing_quotes_stay_with_sentence() {
        assert_eq!(
            segment_sentences("He said \"stop!\" Then he left."),
            vec!["He said \"stop!\"", "Then he left."]
        );
    }

    #[test]
    fn unterminated_tail_is_a_sentence() {
        assert_eq!(
            segment_sentences("First one. trailing fragment"),
            // Lowercase continuation guard keeps the fragment attached.
            vec!["First one. trailing fragment"]
        );
        assert_eq!(
            segment_sentences("First one. Trailing fragment"),
            vec!["First one.", "Trailing fragment"]
        );
    }

    #[test]
    fn concatenation_preserves_non_whitespace() {
        let inputs = [
            "A. B? C!",
            "Dr. Smith left. He returned.",
            "One sentence only",
            "Multi... dots?! Yes. e.g. this one.",
        ];
        for input in inputs {
            let joined: String = segment_sentences(input).join(" ");
            let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            assert_eq!(squash(&joined), squash(input), "input: {input}");
        }
    }
}
