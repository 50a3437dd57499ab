//! Parser for the supported wiki-markup subset.
//!
//! Recognized syntax:
//! - `<ref>...</ref>` and self-closing `<ref name=.../>` inline citations,
//! - `{{citation needed}}`, `{{cn}}`, `{{fact}}` templates (case-insensitive
//!   names, optional `|...` arguments),
//! - `== Heading ==` section headings (2+ equals signs),
//! - blank lines as paragraph boundaries.
//!
//! Markers are stripped from the text and recorded as per-sentence flags.
//! Anything else (unknown templates, stray closers, unbalanced markers) is
//! dropped with a recoverable warning and the surrounding sentence is kept.

use super::segment::segment_spans;
use super::{
    tokenize, CorpusError, Paragraph, QualityClass, RawArticle, Section, Statement,
    MIN_SENTENCE_TOKENS,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub article_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MarkerKind {
    InlineCitation,
    CitationNeeded,
}

const CITATION_NEEDED_TEMPLATES: [&str; 3] = ["citation needed", "cn", "fact"];

/// ASCII case-insensitive prefix test, safe on any byte offset.
fn starts_ci(s: &str, pat: &str) -> bool {
    s.len() >= pat.len() && s.as_bytes()[..pat.len()].eq_ignore_ascii_case(pat.as_bytes())
}

/// Byte offset of the first ASCII case-insensitive occurrence of `pat`.
/// The pattern is pure ASCII, so a match always lands on a char boundary.
fn find_ci(s: &str, pat: &str) -> Option<usize> {
    let (sb, pb) = (s.as_bytes(), pat.as_bytes());
    if pb.is_empty() || sb.len() < pb.len() {
        return None;
    }
    (0..=sb.len() - pb.len()).find(|&i| sb[i..i + pb.len()].eq_ignore_ascii_case(pb))
}

/// Removes markers from one paragraph of raw text. Returns the cleaned text
/// and the markers found, each tagged with its byte position in the cleaned
/// text.
fn strip_markers(
    raw: &str,
    article_id: &str,
    warnings: &mut Vec<ParseWarning>,
) -> (String, Vec<(usize, MarkerKind)>) {
    let mut clean = String::with_capacity(raw.len());
    let mut markers = Vec::new();
    let mut pos = 0usize;
    let warn = |warnings: &mut Vec<ParseWarning>, message: String| {
        warnings.push(ParseWarning {
            article_id: article_id.to_string(),
            message,
        });
    };
    while pos < raw.len() {
        if starts_ci(&raw[pos..], "<ref") {
            let tag_end = match raw[pos..].find('>') {
                Some(rel) => pos + rel,
                None => {
                    warn(warnings, "unterminated <ref tag; text dropped".into());
                    break;
                }
            };
            if raw[pos..tag_end].ends_with('/') {
                // Self-closing <ref name=.../>.
                markers.push((clean.len(), MarkerKind::InlineCitation));
                pos = tag_end + 1;
            } else {
                match find_ci(&raw[tag_end..], "</ref>") {
                    Some(rel) => {
                        markers.push((clean.len(), MarkerKind::InlineCitation));
                        pos = tag_end + rel + "</ref>".len();
                    }
                    None => {
                        warn(warnings, "unclosed <ref>; reference text dropped".into());
                        break;
                    }
                }
            }
        } else if starts_ci(&raw[pos..], "</ref>") {
            warn(warnings, "stray </ref> dropped".into());
            pos += "</ref>".len();
        } else if raw[pos..].starts_with("{{") {
            match raw[pos..].find("}}") {
                Some(rel) => {
                    let inner = &raw[pos + 2..pos + rel];
                    let name = inner.split('|').next().unwrap_or("").trim().to_lowercase();
                    if CITATION_NEEDED_TEMPLATES.contains(&name.as_str()) {
                        markers.push((clean.len(), MarkerKind::CitationNeeded));
                    } else {
                        warn(warnings, format!("unsupported template {{{{{name}}}}} dropped"));
                    }
                    pos += rel + 2;
                }
                None => {
                    warn(warnings, "unbalanced {{ template; text dropped".into());
                    break;
                }
            }
        } else {
            let ch = raw[pos..].chars().next().unwrap();
            clean.push(ch);
            pos += ch.len_utf8();
        }
    }
    (clean, markers)
}

/// Heading line: `== text ==` with two or more equals signs on each side.
fn heading_text(line: &str) -> Option<&str> {
    let t = line.trim();
    if t.len() >= 4 && t.starts_with("==") && t.ends_with("==") {
        let inner = t.trim_matches('=').trim();
        Some(inner)
    } else {
        None
    }
}

/// Which sentence span owns the marker at cleaned-text position `pos`: the
/// last sentence that starts strictly before it (markers follow the text
/// they annotate), or the first sentence for a leading marker.
fn owning_sentence(spans: &[(usize, usize)], pos: usize) -> Option<usize> {
    if spans.is_empty() {
        return None;
    }
    let mut owner = 0;
    for (i, &(start, _)) in spans.iter().enumerate() {
        if start < pos {
            owner = i;
        } else {
            break;
        }
    }
    Some(owner)
}

fn build_paragraph(
    raw: &str,
    article_id: &str,
    heading: &str,
    is_lead: bool,
    warnings: &mut Vec<ParseWarning>,
) -> Option<Paragraph> {
    let (clean, markers) = strip_markers(raw, article_id, warnings);
    if clean.trim().is_empty() {
        return None;
    }
    let spans = segment_spans(&clean);
    let mut inline = vec![false; spans.len()];
    let mut needed = vec![false; spans.len()];
    for (pos, kind) in markers {
        if let Some(i) = owning_sentence(&spans, pos) {
            match kind {
                MarkerKind::InlineCitation => inline[i] = true,
                MarkerKind::CitationNeeded => needed[i] = true,
            }
        }
    }
    let mut statements = Vec::new();
    for (i, &(start, end)) in spans.iter().enumerate() {
        let text = clean[start..end].split_whitespace().collect::<Vec<_>>().join(" ");
        let tokens = tokenize(&text);
        if tokens.len() < MIN_SENTENCE_TOKENS {
            continue;
        }
        statements.push(Statement {
            article_id: article_id.to_string(),
            section_heading: heading.to_string(),
            is_lead,
            text,
            tokens,
            has_inline_citation: inline[i],
            has_citation_needed_tag: needed[i],
        });
    }
    if statements.is_empty() {
        return None;
    }
    let has_any_citation = statements.iter().any(|s| s.has_inline_citation);
    Some(Paragraph {
        statements,
        has_any_citation,
    })
}

/// Parses one article's markup, collecting recoverable warnings.
pub fn parse_article_verbose(
    markup: &str,
    article_id: &str,
    quality: QualityClass,
) -> Result<(RawArticle, Vec<ParseWarning>), CorpusError> {
    if markup.trim().is_empty() {
        return Err(CorpusError::EmptyArticle);
    }
    let mut warnings = Vec::new();
    let mut sections: Vec<Section> = vec![Section {
        heading: String::new(),
        paragraphs: Vec::new(),
    }];
    let mut block = String::new();

    let flush_block = |sections: &mut Vec<Section>, block: &mut String, warnings: &mut Vec<ParseWarning>| {
        if block.trim().is_empty() {
            block.clear();
            return;
        }
        let is_lead = sections.len() == 1;
        let section = sections.last_mut().unwrap();
        let heading = section.heading.clone();
        if let Some(p) = build_paragraph(block, article_id, &heading, is_lead, warnings) {
            section.paragraphs.push(p);
        }
        block.clear();
    };

    for line in markup.lines() {
        if let Some(h) = heading_text(line) {
            flush_block(&mut sections, &mut block, &mut warnings);
            let (clean_heading, _) = strip_markers(h, article_id, &mut warnings);
            sections.push(Section {
                heading: clean_heading.trim().to_string(),
                paragraphs: Vec::new(),
            });
        } else if line.trim().is_empty() {
            flush_block(&mut sections, &mut block, &mut warnings);
        } else {
            if !block.is_empty() {
                block.push(' ');
            }
            block.push_str(line.trim());
        }
    }
    flush_block(&mut sections, &mut block, &mut warnings);

    Ok((
        RawArticle {
            article_id: article_id.to_string(),
            title: article_id.to_string(),
            quality_class: quality,
            sections,
        },
        warnings,
    ))
}

/// Parses one article's markup, discarding warnings.
pub fn parse_article(
    markup: &str,
    article_id: &str,
    quality: QualityClass,
) -> Result<RawArticle, CorpusError> {
    parse_article_verbose(markup, article_id, quality).map(|(a, _)| a)
}

/// Writes an article back to the supported markup subset. Citation flags
/// become placeholder markers after their sentence, so
/// `parse(render(parse(m)))` yields the same statements as `parse(m)`.
pub fn render_article(article: &RawArticle) -> String {
    let mut out = String::new();
    for (i, section) in article.sections.iter().enumerate() {
        if i > 0 {
            out.push_str(&format!("== {} ==\n\n", section.heading));
        }
        for paragraph in &section.paragraphs {
            let mut parts = Vec::new();
            for s in &paragraph.statements {
                let mut sentence = s.text.clone();
                if s.has_inline_citation {
                    sentence.push_str("<ref>source</ref>");
                }
                if s.has_citation_needed_tag {
                    sentence.push_str("{{citation needed}}");
                }
                parts.push(sentence);
            }
            out.push_str(&parts.join(" "));
            out.push_str("\n\n");
        }
    }
    out
}
