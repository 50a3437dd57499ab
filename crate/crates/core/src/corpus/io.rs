//! JSONL corpus serialization.
//!
//! One instance per line, UTF-8, LF line endings:
//!
//! ```text
//! {"schema_version":1,"article_id":"...","section":"...","is_lead":false,
//!  "text":"...","tokens":["..."],"label":"positive","dataset":"FA"}
//! ```
//!
//! Reason-corpus lines additionally carry `"reason":"historical"` (one of
//! the eight reason strings). Citation flags are not stored; under the
//! dataset label invariants they are implied by (label, dataset): FA/RND
//! positives carry an inline citation, LQN positives carry a
//! citation-needed tag, and negatives carry neither.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    CorpusError, DatasetId, Label, LabeledInstance, Reason, ReasonInstance, Statement,
};

pub const CORPUS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CorpusLine {
    schema_version: u32,
    article_id: String,
    section: String,
    is_lead: bool,
    text: String,
    tokens: Vec<String>,
    label: Label,
    dataset: DatasetId,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<Reason>,
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn flags_for(label: Label, dataset: DatasetId) -> (bool, bool) {
    match (label, dataset) {
        (Label::Positive, DatasetId::Lqn) => (false, true),
        (Label::Positive, _) => (true, false),
        (Label::Negative, _) => (false, false),
    }
}

fn line_from(statement: &Statement, label: Label, dataset: DatasetId, reason: Option<Reason>) -> CorpusLine {
    CorpusLine {
        schema_version: CORPUS_SCHEMA_VERSION,
        article_id: statement.article_id.clone(),
        section: statement.section_heading.clone(),
        is_lead: statement.is_lead,
        text: statement.text.clone(),
        tokens: statement.tokens.clone(),
        label,
        dataset,
        reason,
    }
}

fn statement_from(line: &CorpusLine) -> Statement {
    let (has_inline_citation, has_citation_needed_tag) = flags_for(line.label, line.dataset);
    Statement {
        article_id: line.article_id.clone(),
        section_heading: line.section.clone(),
        is_lead: line.is_lead,
        text: line.text.clone(),
        tokens: line.tokens.clone(),
        has_inline_citation,
        has_citation_needed_tag,
    }
}

fn write_lines(lines: &[CorpusLine], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for line in lines {
        let json = serde_json::to_string(line)
            .map_err(|e| io_err(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        writer.write_all(json.as_bytes()).map_err(|e| io_err(path, e))?;
        writer.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<CorpusLine>, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CorpusLine = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if parsed.schema_version != CORPUS_SCHEMA_VERSION {
            return Err(CorpusError::SchemaVersion {
                found: parsed.schema_version,
                expected: CORPUS_SCHEMA_VERSION,
            });
        }
        out.push(parsed);
    }
    Ok(out)
}

pub fn write_corpus(instances: &[LabeledInstance], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let lines: Vec<CorpusLine> = instances
        .iter()
        .map(|i| line_from(&i.statement, i.label, i.dataset, None))
        .collect();
    write_lines(&lines, path.as_ref())
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<LabeledInstance>, CorpusError> {
    let lines = read_lines(path.as_ref())?;
    Ok(lines
        .iter()
        .map(|l| LabeledInstance {
            statement: statement_from(l),
            label: l.label,
            dataset: l.dataset,
        })
        .collect())
}

/// Reason instances are always cited featured-article sentences, so they are
/// written as FA positives plus the reason field.
pub fn write_reason_corpus(
    instances: &[ReasonInstance],
    path: impl AsRef<Path>,
) -> Result<(), CorpusError> {
    let lines: Vec<CorpusLine> = instances
        .iter()
        .map(|i| line_from(&i.statement, Label::Positive, DatasetId::Fa, Some(i.reason)))
        .collect();
    write_lines(&lines, path.as_ref())
}

pub fn read_reason_corpus(path: impl AsRef<Path>) -> Result<Vec<ReasonInstance>, CorpusError> {
    let lines = read_lines(path.as_ref())?;
    lines
        .iter()
        .enumerate()
        .map(|(idx, l)| {
            let reason = l.reason.ok_or(CorpusError::Malformed {
                line: idx + 1,
                message: "missing reason field".to_string(),
            })?;
            Ok(ReasonInstance {
                statement: statement_from(l),
                reason,
            })
        })
        .collect()
}
