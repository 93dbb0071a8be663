use std::collections::BTreeSet;

use rust_stemmers::{Algorithm, Stemmer};

use dissbus_core::fixtures::fixture_dir;
use dissbus_core::stem::stem;

const EXTRA: &[&str] = &[
    "caresses", "ponies", "ties", "cats", "feed", "agreed", "plastered", "motoring", "sing", "conflated",
    "troubled", "sized", "hopping", "tanned", "falling", "hissing", "fizzed", "failing", "filing", "happy",
    "sky", "relational", "conditional", "rational", "valenci", "digitizer", "conformabli", "radicalli",
    "differentli", "vileli", "analogousli", "vietnamization", "predication", "operator", "feudalism",
    "decisiveness", "hopefulness", "callousness", "formaliti", "sensitiviti", "sensibiliti", "triplicate",
    "formative", "formalize", "electriciti", "electrical", "hopeful", "goodness", "revival", "allowance",
    "inference", "airliner", "gyroscopic", "adjustable", "defensible", "irritant", "replacement",
    "adjustment", "dependent", "adoption", "homologou", "communism", "activate", "angulariti",
    "homologous", "effective", "bowdlerize", "probate", "rate", "cease", "controll", "roll", "generously",
    "generate", "generously", "communication", "arsenal", "commune", "universal", "news", "atlas",
    "cosmos", "bias", "andes", "inning", "outing", "canning", "herring", "earring", "proceed", "exceed",
    "succeed", "dying", "lying", "tying", "skis", "skies", "idly", "gently", "ugly", "early", "only",
    "singly", "consign", "consigned", "consigning", "consignment", "knightly", "kneel", "restaurant",
    "atmosphere", "ambiance", "delicious", "definitely", "recommend", "recommended", "friendly",
    "service", "services", "waitress", "limited", "parking", "prices", "reasonable", "portions",
];

/// Whether the extra agentive `-er` rule may change this word: a doubled
/// m, n, p or g followed by `er` or `ers`.
fn agentive(word: &str) -> bool {
    if ["dinner", "supper", "pepper", "summer", "manner"].iter().any(|n| word.starts_with(n)) {
        return false;
    }
    let w = word.strip_suffix('s').unwrap_or(word);
    let Some(base) = w.strip_suffix("er") else {
        return false;
    };
    let b = base.as_bytes();
    b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] && matches!(b[b.len() - 1], b'm' | b'n' | b'p' | b'g')
}

fn vocabulary() -> BTreeSet<String> {
    let text = std::fs::read_to_string(fixture_dir().join("reviews.jsonl")).expect("fixture corpus");
    let mut words: BTreeSet<String> = text
        .split(|c: char| !c.is_ascii_alphabetic())
        .filter(|w| w.len() > 2)
        .map(str::to_lowercase)
        .collect();
    words.extend(EXTRA.iter().map(|w| w.to_string()));
    words
}

#[test]
fn matches_snowball_english_outside_the_agentive_rule() {
    let oracle = Stemmer::create(Algorithm::English);
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for w in vocabulary() {
        if agentive(&w) {
            continue;
        }
        compared += 1;
        let (ours, theirs) = (stem(&w), oracle.stem(&w).to_string());
        if ours != theirs {
            mismatches.push(format!("{w}: {ours} vs {theirs}"));
        }
    }
    assert!(compared > 250, "vocabulary too small: {compared}");
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn agentive_words_reduce_to_the_verb_stem() {
    let oracle = Stemmer::create(Algorithm::English);
    for (agent, verb) in [("runner", "run"), ("stemmer", "stem"), ("shopper", "shop"), ("beginner", "begin")] {
        assert_eq!(stem(agent), oracle.stem(verb), "{agent}");
    }
    for w in ["server", "waiter", "dinner", "dinners", "supper", "pepper", "better", "burger"] {
        assert_eq!(stem(w), oracle.stem(w), "{w}");
    }
}
