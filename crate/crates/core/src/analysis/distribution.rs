//! Reason-distribution tables: how often each citation reason occurs per
//! article section or per article topic.

use std::collections::HashMap;

use super::AnalysisError;
use crate::corpus::{Reason, ReasonInstance};
use crate::encoder::LEAD_SECTION_KEY;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Section,
    Topic,
}

impl GroupBy {
    pub fn parse(s: &str) -> Option<GroupBy> {
        match s.to_ascii_lowercase().as_str() {
            "section" => Some(GroupBy::Section),
            "topic" => Some(GroupBy::Topic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub reason: Reason,
    pub group: String,
    pub count: usize,
}

/// Counts per (reason, group); rows sorted by reason order, then count
/// descending, then group name. Every instance contributes exactly one row
/// count, so the counts sum to the corpus size.
#[derive(Debug, Clone)]
pub struct DistributionTable {
    pub group_by: GroupBy,
    pub rows: Vec<DistributionRow>,
}

impl DistributionTable {
    /// The top-n groups for one reason.
    pub fn top_for(&self, reason: Reason, n: usize) -> Vec<&DistributionRow> {
        self.rows
            .iter()
            .filter(|r| r.reason == reason)
            .take(n)
            .collect()
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Aggregates a reason corpus by section heading or by article topic.
/// Topics come from an optional sidecar map `article_id -> topic`; grouping
/// by topic without one is an error, and unmapped articles count under
/// "unknown".
pub fn reason_distribution(
    instances: &[ReasonInstance],
    group_by: GroupBy,
    topics: Option<&HashMap<String, String>>,
) -> Result<DistributionTable, AnalysisError> {
    if instances.is_empty() {
        return Err(AnalysisError::BadInput("no reason instances".into()));
    }
    if group_by == GroupBy::Topic && topics.is_none() {
        return Err(AnalysisError::BadInput(
            "grouping by topic requires a topics map".into(),
        ));
    }
    let mut counts: HashMap<(Reason, String), usize> = HashMap::new();
    for inst in instances {
        let group = match group_by {
            GroupBy::Section => {
                if inst.statement.is_lead {
                    LEAD_SECTION_KEY.to_string()
                } else {
                    inst.statement.section_heading.clone()
                }
            }
            GroupBy::Topic => topics
                .unwrap()
                .get(&inst.statement.article_id)
                .cloned()
                .unwrap_or_else(|| "unknown".to_string()),
        };
        *counts.entry((inst.reason, group)).or_insert(0) += 1;
    }
    let mut rows: Vec<DistributionRow> = counts
        .into_iter()
        .map(|((reason, group), count)| DistributionRow {
            reason,
            group,
            count,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.reason
            .index()
            .cmp(&b.reason.index())
            .then_with(|| b.count.cmp(&a.count))
            .then_with(|| a.group.cmp(&b.group))
    });
    Ok(DistributionTable { group_by, rows })
}

pub fn distribution_to_csv(table: &DistributionTable) -> String {
    let axis = match table.group_by {
        GroupBy::Section => "section",
        GroupBy::Topic => "topic",
    };
    let mut out = format!("reason,{axis},count\n");
    for row in &table.rows {
        out.push_str(&format!("{},{},{}\n", row.reason, row.group, row.count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Statement};

    fn inst(reason: Reason, section: &str, is_lead: bool, article: &str) -> ReasonInstance {
        let text = "Some cited sentence with several tokens.".to_string();
        ReasonInstance {
            statement: Statement {
                article_id: article.to_string(),
                section_heading: section.to_string(),
                is_lead,
                tokens: tokenize(&text),
                text,
                has_inline_citation: true,
                has_citation_needed_tag: false,
            },
            reason,
        }
    }

    #[test]
    fn single_reason_corpus_has_one_row() {
        let corpus = vec![inst(Reason::Historical, "History", false, "a")];
        let table = reason_distribution(&corpus, GroupBy::Section, None).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].group, "History");
        assert_eq!(table.rows[0].count, 1);
    }

    #[test]
    fn counts_sum_to_corpus_size() {
        let corpus = vec![
            inst(Reason::Historical, "History", false, "a"),
            inst(Reason::Historical, "History", false, "b"),
            inst(Reason::Quotation, "Reception", false, "a"),
            inst(Reason::Scientific, "", true, "c"),
        ];
        let table = reason_distribution(&corpus, GroupBy::Section, None).unwrap();
        assert_eq!(table.total(), corpus.len());
    }

    // Hand-tallied fixture: 3x (historical, History), 1x (historical,
    // Background), 2x (quotation, Reception), 1x (scientific, <lead>).
    #[test]
    fn fixture_matches_hand_tally() {
        let corpus = vec![
            inst(Reason::Historical, "History", false, "a"),
            inst(Reason::Historical, "History", false, "b"),
            inst(Reason::Historical, "History", false, "c"),
            inst(Reason::Historical, "Background", false, "a"),
            inst(Reason::Quotation, "Reception", false, "a"),
            inst(Reason::Quotation, "Reception", false, "b"),
            inst(Reason::Scientific, "ignored", true, "c"),
        ];
        let table = reason_distribution(&corpus, GroupBy::Section, None).unwrap();
        let hist = table.top_for(Reason::Historical, 5);
        assert_eq!(hist.len(), 2);
        assert_eq!((hist[0].group.as_str(), hist[0].count), ("History", 3));
        assert_eq!((hist[1].group.as_str(), hist[1].count), ("Background", 1));
        let sci = table.top_for(Reason::Scientific, 5);
        assert_eq!(sci[0].group, LEAD_SECTION_KEY);
    }

    #[test]
    fn topic_grouping_uses_sidecar_map() {
        let corpus = vec![
            inst(Reason::Historical, "History", false, "a"),
            inst(Reason::Historical, "History", false, "zzz"),
        ];
        let mut topics = HashMap::new();
        topics.insert("a".to_string(), "military conflict".to_string());
        let table = reason_distribution(&corpus, GroupBy::Topic, Some(&topics)).unwrap();
        let groups: Vec<&str> = table.rows.iter().map(|r| r.group.as_str()).collect();
        assert!(groups.contains(&"military conflict"));
        assert!(groups.contains(&"unknown"));
        assert!(reason_distribution(&corpus, GroupBy::Topic, None).is_err());
    }
}
