//! Deterministic lowercase tokenizer.
//!
//! A token is either a maximal run of Unicode alphanumeric characters
//! (lowercased) or a single non-whitespace, non-alphanumeric character.
//! Whitespace only separates. "Don't stop." becomes
//! ["don", "'", "t", "stop", "."].

pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                word.push(lower);
            }
        } else {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                tokens.push(ch.to_string());
            }
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}
