//! Coarse part-of-speech tagger: a closed-class lexicon plus suffix rules
//! over a fixed 12-tag set. Deterministic and dependency-free; it only has
//! to supply a style signal, not linguistic truth.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 12] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Pron,
        PosTag::Det,
        PosTag::Adp,
        PosTag::Num,
        PosTag::Conj,
        PosTag::Prt,
        PosTag::Punct,
        PosTag::X,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Adp => "ADP",
            PosTag::Num => "NUM",
            PosTag::Conj => "CONJ",
            PosTag::Prt => "PRT",
            PosTag::Punct => "PUNCT",
            PosTag::X => "X",
        }
    }

    pub fn index(&self) -> usize {
        PosTag::ALL.iter().position(|t| t == self).unwrap()
    }

    pub fn parse(s: &str) -> Option<PosTag> {
        PosTag::ALL.iter().find(|t| t.as_str() == s).copied()
    }
}

const DET: &[&str] = &[
    "the", "a", "an", "this", "these", "those", "each", "every", "some", "any", "no", "all",
    "both", "either", "neither", "another", "such", "other",
];

const PRON: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my", "your",
    "his", "its", "our", "their", "mine", "yours", "hers", "ours", "theirs", "himself", "herself",
    "itself", "myself", "yourself", "ourselves", "themselves", "who", "whom", "whose", "which",
    "what", "something", "anything", "nothing", "everything", "someone", "anyone", "everyone",
    "nobody",
];

const ADP: &[&str] = &[
    "of", "in", "on", "at", "by", "with", "from", "for", "about", "as", "into", "over", "after",
    "before", "between", "under", "through", "during", "against", "among", "without", "within",
    "along", "across", "behind", "beyond", "near", "since", "until", "upon", "toward", "towards",
    "off", "above", "below", "per", "via", "amid", "despite", "throughout",
];

// "that" is tagged CONJ: in encyclopedic prose it is most often a
// complementizer ("claimed that ...").
const CONJ: &[&str] = &[
    "and", "or", "but", "nor", "so", "yet", "because", "although", "though", "while", "whereas",
    "if", "unless", "that", "whether", "than", "once", "when", "where",
];

const PRT: &[&str] = &["to"];

const VERB: &[&str] = &[
    "am", "is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "having",
    "do", "does", "did", "done", "doing", "will", "would", "can", "could", "may", "might",
    "must", "shall", "should", "went", "gone", "said", "made", "took", "taken", "came", "saw",
    "seen", "knew", "known", "found", "gave", "given", "told", "became", "left", "felt", "put",
    "brought", "began", "begun", "kept", "held", "wrote", "written", "stood", "heard", "let",
    "meant", "set", "met", "ran", "paid", "sat", "spoke", "spoken", "led", "read", "grew",
    "grown", "lost", "fell", "fallen", "sent", "built", "understood", "drew", "drawn", "broke",
    "broken", "spent", "cut", "rose", "risen", "drove", "driven", "bought", "wore", "worn",
    "chose", "chosen", "got", "gotten", "won", "thought",
];

const ADV: &[&str] = &[
    "not", "never", "always", "often", "soon", "again", "here", "there", "now", "then", "thus",
    "too", "very", "well", "almost", "already", "still", "just", "only", "even", "rather",
    "quite", "perhaps", "maybe", "however", "also", "instead", "meanwhile", "moreover",
    "furthermore", "nevertheless", "nonetheless",
];

const NUM_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "hundred", "thousand", "million", "billion", "trillion",
];

fn lexicon_tag(token: &str) -> Option<PosTag> {
    // First match wins; the lists are disjoint except where the earlier
    // list is the deliberate choice.
    for (list, tag) in [
        (DET, PosTag::Det),
        (PRON, PosTag::Pron),
        (ADP, PosTag::Adp),
        (CONJ, PosTag::Conj),
        (PRT, PosTag::Prt),
        (VERB, PosTag::Verb),
        (ADV, PosTag::Adv),
        (NUM_WORDS, PosTag::Num),
    ] {
        if list.contains(&token) {
            return Some(tag);
        }
    }
    None
}

fn suffix_tag(token: &str) -> PosTag {
    let n = token.chars().count();
    if token.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return PosTag::Num;
    }
    if token.chars().all(|c| !c.is_alphanumeric()) {
        return PosTag::Punct;
    }
    let ends = |s: &str| token.ends_with(s);
    if n >= 4 && ends("ly") {
        return PosTag::Adv;
    }
    if (n >= 5 && (ends("ing") || ends("ize") || ends("ise") || ends("ify"))) || (n >= 4 && ends("ed"))
    {
        return PosTag::Verb;
    }
    if ends("tion")
        || ends("sion")
        || ends("ment")
        || ends("ness")
        || ends("ship")
        || ends("hood")
        || ends("ism")
        || ends("ity")
        || ends("ance")
        || ends("ence")
        || ends("ist")
        || ends("ists")
        || ends("er")
        || ends("ers")
        || ends("or")
        || ends("ors")
    {
        return PosTag::Noun;
    }
    if ends("ous")
        || ends("ful")
        || ends("ive")
        || ends("able")
        || ends("ible")
        || ends("ical")
        || ends("ic")
        || ends("al")
        || ends("ian")
        || ends("ish")
        || ends("less")
        || ends("ary")
        || ends("ory")
    {
        return PosTag::Adj;
    }
    if n >= 4 && ends("s") && !ends("ss") {
        return PosTag::Noun;
    }
    PosTag::X
}

/// Tags each (lowercase) token: closed-class lexicon first, then digit,
/// punctuation, and suffix rules, finally X for anything unknown.
pub fn pos_tag(tokens: &[String]) -> Vec<PosTag> {
    tokens
        .iter()
        .map(|t| lexicon_tag(t).unwrap_or_else(|| suffix_tag(t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    #[test]
    fn closed_class_and_digit_rules() {
        assert_eq!(pos_tag(&["the".to_string()]), vec![PosTag::Det]);
        assert_eq!(pos_tag(&["1920".to_string()]), vec![PosTag::Num]);
        assert_eq!(pos_tag(&[".".to_string()]), vec![PosTag::Punct]);
        assert_eq!(pos_tag(&["zzgormph".to_string()]), vec![PosTag::X]);
    }

    // Hand-annotated gold fixture; the tagger must reproduce it exactly.
    #[test]
    fn gold_fixture_sentence_matches() {
        let gold = include_str!("../../tests/fixtures/postag_gold.txt");
        let mut tokens = Vec::new();
        let mut expected = Vec::new();
        for line in gold.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            tokens.push(parts.next().unwrap().to_string());
            expected.push(PosTag::parse(parts.next().unwrap()).unwrap());
        }
        let tags = pos_tag(&tokens);
        for i in 0..tokens.len() {
            assert_eq!(
                tags[i], expected[i],
                "token '{}' tagged {:?}, gold {:?}",
                tokens[i], tags[i], expected[i]
            );
        }
    }

    #[test]
    fn tags_align_with_tokenizer_output() {
        let tokens = tokenize("The scientists quickly measured 42 samples.");
        let tags = pos_tag(&tokens);
        assert_eq!(tags.len(), tokens.len());
        assert_eq!(tags[0], PosTag::Det);
        assert_eq!(tags[1], PosTag::Noun); // scientists: -ists
        assert_eq!(tags[2], PosTag::Adv); // quickly: -ly
        assert_eq!(tags[3], PosTag::Verb); // measured: -ed
        assert_eq!(tags[4], PosTag::Num);
        assert_eq!(*tags.last().unwrap(), PosTag::Punct);
    }
}
