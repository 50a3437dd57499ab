//! Static attention-explanation reports: every token colored by its
//! attention weight, statements grouped by predicted label or reason.
//! Output is byte-deterministic given (model, statements).

use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{Reason, Statement};
use crate::models::{NeedModel, ReasonModel, DECISION_THRESHOLD};

use super::AnalysisError;

/// The model a report explains.
pub enum ExplainedModel<'a> {
    Need(&'a NeedModel),
    Reason(&'a ReasonModel),
}

struct ExplainedStatement {
    group: String,
    score_line: String,
    tokens: Vec<(String, f64)>,
}

fn explain_one(
    model: &ExplainedModel,
    statement: &Statement,
) -> Result<ExplainedStatement, AnalysisError> {
    match model {
        ExplainedModel::Need(m) => {
            let (prob, weights) = m.predict_with_attention(statement)?;
            let group = if prob >= DECISION_THRESHOLD {
                "citation needed".to_string()
            } else {
                "no citation needed".to_string()
            };
            Ok(ExplainedStatement {
                group,
                score_line: format!("p(citation) = {prob:.4}"),
                tokens: statement
                    .tokens
                    .iter()
                    .cloned()
                    .zip(weights)
                    .collect(),
            })
        }
        ExplainedModel::Reason(m) => {
            let (probs, weights) = m.predict_with_attention(statement)?;
            let mut best = 0;
            for (i, p) in probs.iter().enumerate() {
                if *p > probs[best] {
                    best = i;
                }
            }
            let reason = Reason::from_index(best).expect("8 classes");
            Ok(ExplainedStatement {
                group: reason.as_str().to_string(),
                score_line: format!("p({}) = {:.4}", reason, probs[best]),
                tokens: statement
                    .tokens
                    .iter()
                    .cloned()
                    .zip(weights)
                    .collect(),
            })
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_html(groups: &[(String, Vec<ExplainedStatement>)]) -> String {
    let mut html = String::new();
    html.push_str(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n\
         <title>Attention report</title>\n<style>\n\
         body { font-family: sans-serif; margin: 2em; }\n\
         h2 { border-bottom: 1px solid #999; }\n\
         .stmt { margin: 0.8em 0; line-height: 1.9; }\n\
         .score { color: #555; font-size: 0.85em; }\n\
         .tok { padding: 0.1em 0.15em; border-radius: 3px; }\n\
         </style>\n</head>\n<body>\n<h1>Attention report</h1>\n",
    );
    for (group, statements) in groups {
        let _ = writeln!(html, "<h2>{}</h2>", escape(group));
        for s in statements {
            html.push_str("<div class=\"stmt\"><div>");
            let max_w = s
                .tokens
                .iter()
                .map(|(_, w)| *w)
                .fold(f64::MIN_POSITIVE, f64::max);
            for (token, weight) in &s.tokens {
                let alpha = if max_w > 0.0 { weight / max_w } else { 0.0 };
                let _ = write!(
                    html,
                    "<span class=\"tok\" style=\"background: rgba(255,140,0,{alpha:.3})\" \
                     title=\"{weight:.4}\">{}</span> ",
                    escape(token)
                );
            }
            let sum: f64 = s.tokens.iter().map(|(_, w)| w).sum();
            let _ = write!(
                html,
                "</div><div class=\"score\">{} | attention sum = {sum:.4}</div></div>\n",
                escape(&s.score_line)
            );
        }
    }
    html.push_str("</body>\n</html>\n");
    html
}

fn render_text(groups: &[(String, Vec<ExplainedStatement>)]) -> String {
    let mut out = String::from("Attention report\n================\n");
    for (group, statements) in groups {
        let _ = writeln!(out, "\n[{group}]");
        for s in statements {
            let _ = writeln!(out, "  {}", s.score_line);
            for (token, weight) in &s.tokens {
                let _ = writeln!(out, "    {weight:.4}  {token}");
            }
        }
    }
    out
}

/// Renders the HTML report at `path` plus a plain-text fallback next to it
/// (same name, `.txt` extension). Errors on non-attention models.
pub fn render_attention_report(
    model: &ExplainedModel,
    statements: &[Statement],
    path: impl AsRef<Path>,
) -> Result<(), AnalysisError> {
    let path = path.as_ref();
    if statements.is_empty() {
        return Err(AnalysisError::BadInput("no statements to explain".into()));
    }
    let mut grouped: Vec<(String, Vec<ExplainedStatement>)> = Vec::new();
    for statement in statements {
        let explained = explain_one(model, statement)?;
        match grouped.iter_mut().find(|(g, _)| *g == explained.group) {
            Some((_, list)) => list.push(explained),
            None => grouped.push((explained.group.clone(), vec![explained])),
        }
    }
    grouped.sort_by(|a, b| a.0.cmp(&b.0));

    let io_err = |e: std::io::Error| AnalysisError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    std::fs::write(path, render_html(&grouped)).map_err(io_err)?;
    let txt_path = path.with_extension("txt");
    std::fs::write(&txt_path, render_text(&grouped)).map_err(|e| AnalysisError::Io {
        path: txt_path.clone(),
        source: e,
    })?;
    Ok(())
}
