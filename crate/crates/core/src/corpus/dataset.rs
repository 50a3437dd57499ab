//! FA / LQN / RND labeled dataset construction.
//!
//! Eligibility rules shared by all three builders:
//! - positives for FA/RND carry an inline citation; positives for LQN carry
//!   a citation-needed tag;
//! - negatives have neither flag and sit in a paragraph with no citation;
//! - a sentence carrying both an inline citation and a citation-needed tag
//!   is contradictory supervision and is excluded everywhere.
//!
//! Articles are visited in ascending `article_id` order before sampling, so
//! the eligible pools (and therefore the seeded samples) do not depend on
//! input order.

use super::{CorpusError, DatasetId, Label, LabeledInstance, QualityClass, RawArticle, Statement};
use crate::numerics::rng::SplitMix64;

/// Default size for the RND dataset.
pub const DEFAULT_RND_TOTAL: usize = 20_000;

fn sorted_refs(articles: &[RawArticle]) -> Vec<&RawArticle> {
    let mut refs: Vec<&RawArticle> = articles.iter().collect();
    refs.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    refs
}

fn contradictory(s: &Statement) -> bool {
    s.has_inline_citation && s.has_citation_needed_tag
}

fn eligible_negative(s: &Statement, paragraph_has_citation: bool) -> bool {
    !s.has_inline_citation && !s.has_citation_needed_tag && !paragraph_has_citation
}

/// Collects positive and negative statement pools over the articles, in
/// deterministic document order.
fn collect_pools<'a, P>(
    articles: &[&'a RawArticle],
    is_positive: P,
) -> (Vec<&'a Statement>, Vec<&'a Statement>)
where
    P: Fn(&Statement) -> bool,
{
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for article in articles {
        for section in &article.sections {
            for paragraph in &section.paragraphs {
                for statement in &paragraph.statements {
                    if contradictory(statement) {
                        continue;
                    }
                    if is_positive(statement) {
                        positives.push(statement);
                    } else if eligible_negative(statement, paragraph.has_any_citation) {
                        negatives.push(statement);
                    }
                }
            }
        }
    }
    (positives, negatives)
}

fn sample<'a>(
    pool: &[&'a Statement],
    n: usize,
    class: &'static str,
    rng: &mut SplitMix64,
) -> Result<Vec<&'a Statement>, CorpusError> {
    if pool.len() < n {
        return Err(CorpusError::Insufficient {
            class,
            requested: n,
            available: pool.len(),
        });
    }
    Ok(rng
        .sample_indices(pool.len(), n)
        .into_iter()
        .map(|i| pool[i])
        .collect())
}

fn assemble(
    positives: Vec<&Statement>,
    negatives: Vec<&Statement>,
    dataset: DatasetId,
) -> Vec<LabeledInstance> {
    let mut out = Vec::with_capacity(positives.len() + negatives.len());
    for s in positives {
        out.push(LabeledInstance {
            statement: s.clone(),
            label: Label::Positive,
            dataset,
        });
    }
    for s in negatives {
        out.push(LabeledInstance {
            statement: s.clone(),
            label: Label::Negative,
            dataset,
        });
    }
    out
}

/// Featured-article dataset: positives have inline citations, negatives sit
/// in citation-free paragraphs. All articles must be featured.
pub fn build_fa_dataset(
    articles: &[RawArticle],
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>, CorpusError> {
    for a in articles {
        if a.quality_class != QualityClass::Featured {
            return Err(CorpusError::NotFeatured {
                article_id: a.article_id.clone(),
            });
        }
    }
    let refs = sorted_refs(articles);
    let (pos_pool, neg_pool) = collect_pools(&refs, |s| s.has_inline_citation);
    let mut rng = SplitMix64::new(seed);
    let positives = sample(&pos_pool, n_pos, "positive", &mut rng)?;
    let negatives = sample(&neg_pool, n_neg, "negative", &mut rng)?;
    Ok(assemble(positives, negatives, DatasetId::Fa))
}

/// Low-quality dataset: positives are citation-needed-tagged statements,
/// drawn only from articles that contain at least one such tag.
pub fn build_lqn_dataset(
    articles: &[RawArticle],
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>, CorpusError> {
    let refs: Vec<&RawArticle> = sorted_refs(articles)
        .into_iter()
        .filter(|a| a.statements().any(|s| s.has_citation_needed_tag))
        .collect();
    let (pos_pool, neg_pool) =
        collect_pools(&refs, |s| s.has_citation_needed_tag && !s.has_inline_citation);
    let mut rng = SplitMix64::new(seed);
    let positives = sample(&pos_pool, n_pos, "positive", &mut rng)?;
    let negatives = sample(&neg_pool, n_neg, "negative", &mut rng)?;
    Ok(assemble(positives, negatives, DatasetId::Lqn))
}

/// Random dataset: articles of any quality, balanced 50/50.
pub fn build_rnd_dataset(
    articles: &[RawArticle],
    n_total: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>, CorpusError> {
    if n_total % 2 != 0 {
        return Err(CorpusError::OddTotal(n_total));
    }
    let refs = sorted_refs(articles);
    let (pos_pool, neg_pool) = collect_pools(&refs, |s| s.has_inline_citation);
    let mut rng = SplitMix64::new(seed);
    let half = n_total / 2;
    let positives = sample(&pos_pool, half, "positive", &mut rng)?;
    let negatives = sample(&neg_pool, half, "negative", &mut rng)?;
    Ok(assemble(positives, negatives, DatasetId::Rnd))
}

/// Checks the label invariants over a built dataset. Used by tests and the
/// corpus CLI's self-check.
pub fn validate_dataset(instances: &[LabeledInstance]) -> Result<(), String> {
    for (i, inst) in instances.iter().enumerate() {
        let s = &inst.statement;
        match inst.label {
            Label::Positive => {
                let ok = match inst.dataset {
                    DatasetId::Fa | DatasetId::Rnd => s.has_inline_citation,
                    DatasetId::Lqn => s.has_citation_needed_tag,
                };
                if !ok {
                    return Err(format!("instance {i}: positive without its source flag"));
                }
            }
            Label::Negative => {
                if s.has_inline_citation || s.has_citation_needed_tag {
                    return Err(format!("instance {i}: negative carries a citation flag"));
                }
            }
        }
        if s.has_inline_citation && s.has_citation_needed_tag {
            return Err(format!("instance {i}: contradictory flags"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_article, write_corpus};

    fn featured(markup: &str, id: &str) -> RawArticle {
        parse_article(markup, id, QualityClass::Featured).unwrap()
    }

    fn fixture_articles() -> Vec<RawArticle> {
        let a = featured(
            "Lead fact is cited properly.<ref>a</ref> Lead fact lacks a citation here.\n\n\
             Entirely uncited paragraph lives here. Another uncited sentence follows it. A third uncited one too.\n\n\
             == History ==\n\nOld things happened back then.<ref>b</ref> Some people disagree about that.\n\n\
             Nothing in this paragraph is cited. It just keeps going along.",
            "art1",
        );
        let b = featured(
            "Opening sentence with a citation.<ref>c</ref>\n\n\
             This one is flagged as needing work.{{citation needed}} Neighbors of the flag are plain.\n\n\
             == Legacy ==\n\nPlain uncited paragraph text here. More plain uncited text follows.",
            "art2",
        );
        vec![a, b]
    }

    #[test]
    fn negatives_require_citation_free_paragraph() {
        // One paragraph: one cited + one uncited sentence. The uncited one is
        // not an eligible negative because its paragraph has a citation.
        let art = featured(
            "This sentence is cited here.<ref>x</ref> This sentence is not cited.",
            "solo",
        );
        let err = build_fa_dataset(&[art], 1, 1, 7).unwrap_err();
        match err {
            CorpusError::Insufficient {
                class, available, ..
            } => {
                assert_eq!(class, "negative");
                assert_eq!(available, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_request_gives_empty_dataset() {
        let arts = fixture_articles();
        let out = build_fa_dataset(&arts, 0, 0, 1).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn seeded_builds_are_identical() {
        let arts = fixture_articles();
        let a = build_fa_dataset(&arts, 2, 3, 7).unwrap();
        let b = build_fa_dataset(&arts, 2, 3, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeded_builds_are_byte_identical_on_disk() {
        let arts = fixture_articles();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("one.jsonl");
        let p2 = dir.path().join("two.jsonl");
        write_corpus(&build_fa_dataset(&arts, 2, 3, 7).unwrap(), &p1).unwrap();
        write_corpus(&build_fa_dataset(&arts, 2, 3, 7).unwrap(), &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn fa_requires_featured_articles() {
        let other = parse_article("Some plain text lives here.", "x", QualityClass::Other).unwrap();
        assert!(matches!(
            build_fa_dataset(&[other], 0, 0, 1),
            Err(CorpusError::NotFeatured { .. })
        ));
    }

    #[test]
    fn lqn_positives_are_tag_only() {
        let arts = fixture_articles();
        let out = build_lqn_dataset(&arts, 1, 1, 3).unwrap();
        validate_dataset(&out).unwrap();
        let pos: Vec<_> = out.iter().filter(|i| i.label == Label::Positive).collect();
        assert_eq!(pos.len(), 1);
        assert!(pos[0].statement.has_citation_needed_tag);
        assert!(!pos[0].statement.has_inline_citation);
    }

    #[test]
    fn lqn_inline_citation_is_not_a_positive() {
        // art1 has inline citations but no cn tags, so it is filtered out
        // entirely and its cited statements cannot become LQN positives.
        let arts = fixture_articles();
        let err = build_lqn_dataset(&arts, 2, 0, 3).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::Insufficient {
                class: "positive",
                available: 1,
                ..
            }
        ));
    }

    #[test]
    fn lqn_lead_tag_is_eligible() {
        let art = featured(
            "Lead claim flagged for checking.{{cn}} Companion lead sentence here too.",
            "leadtag",
        );
        let out = build_lqn_dataset(&[art], 1, 0, 5).unwrap();
        assert!(out[0].statement.is_lead);
    }

    #[test]
    fn rnd_is_balanced_and_rejects_odd_totals() {
        let arts = fixture_articles();
        let out = build_rnd_dataset(&arts, 4, 11).unwrap();
        assert_eq!(out.len(), 4);
        let pos = out.iter().filter(|i| i.label == Label::Positive).count();
        assert_eq!(pos, 2);
        validate_dataset(&out).unwrap();
        assert!(matches!(
            build_rnd_dataset(&arts, 3, 11),
            Err(CorpusError::OddTotal(3))
        ));
    }

    #[test]
    fn built_datasets_satisfy_label_invariants_and_are_duplicate_free() {
        let arts = fixture_articles();
        let out = build_fa_dataset(&arts, 3, 4, 99).unwrap();
        validate_dataset(&out).unwrap();
        let mut keys: Vec<String> = out
            .iter()
            .map(|i| {
                format!(
                    "{}|{}|{}",
                    i.statement.article_id, i.statement.section_heading, i.statement.text
                )
            })
            .collect();
        keys.sort();
        let before = keys.len();
        keys.dedup();
        assert_eq!(keys.len(), before, "duplicate statement in dataset");
    }

    #[test]
    fn article_input_order_does_not_matter() {
        let mut arts = fixture_articles();
        let a = build_fa_dataset(&arts, 2, 3, 7).unwrap();
        arts.reverse();
        let b = build_fa_dataset(&arts, 2, 3, 7).unwrap();
        assert_eq!(a, b);
    }
}
