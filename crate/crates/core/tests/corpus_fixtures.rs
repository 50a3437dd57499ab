//! Fixture-driven corpus checks: the hand-segmented sentence oracle and
//! dataset building over the bundled articles file.

use citeneed::corpus::{
    build_fa_dataset, build_lqn_dataset, parse_article, render_article, segment_sentences,
    validate_dataset, Label, QualityClass, RawArticle,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture exists")
}

#[test]
fn segmentation_matches_hand_segmented_fixture() {
    let input = fixture("segmentation_input.txt");
    let expected: Vec<String> = fixture("segmentation_expected.txt")
        .lines()
        .map(|l| l.to_string())
        .collect();
    let got = segment_sentences(input.trim_end());
    assert_eq!(got, expected);
}

fn fixture_articles() -> Vec<RawArticle> {
    fixture("articles.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let quality = match v["quality"].as_str().unwrap() {
                "featured" => QualityClass::Featured,
                _ => QualityClass::Other,
            };
            parse_article(
                v["markup"].as_str().unwrap(),
                v["article_id"].as_str().unwrap(),
                quality,
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn fa_dataset_from_fixture_articles_is_valid() {
    let articles: Vec<RawArticle> = fixture_articles()
        .into_iter()
        .filter(|a| a.quality_class == QualityClass::Featured)
        .collect();
    let dataset = build_fa_dataset(&articles, 10, 20, 77).unwrap();
    assert_eq!(dataset.len(), 30);
    validate_dataset(&dataset).unwrap();
    assert_eq!(
        dataset.iter().filter(|i| i.label == Label::Positive).count(),
        10
    );
}

#[test]
fn lqn_dataset_from_fixture_articles_is_valid() {
    let articles = fixture_articles();
    let dataset = build_lqn_dataset(&articles, 3, 6, 5).unwrap();
    validate_dataset(&dataset).unwrap();
    for inst in dataset.iter().filter(|i| i.label == Label::Positive) {
        assert!(inst.statement.has_citation_needed_tag);
    }
}

#[test]
fn fixture_articles_round_trip_through_render() {
    for article in fixture_articles() {
        let again = parse_article(
            &render_article(&article),
            &article.article_id,
            article.quality_class,
        )
        .unwrap();
        let a: Vec<_> = article.statements().collect();
        let b: Vec<_> = again.statements().collect();
        assert_eq!(a, b, "article {}", article.article_id);
    }
}
