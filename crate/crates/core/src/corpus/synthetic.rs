//! Seeded synthetic email corpus.
//!
//! Spam emails are mostly neutral text carrying a handful of words from a
//! spam-indicative pool (a tenth of them add one keyword-stuffed "pitch"
//! sentence); ham emails carry a moderate sprinkling of office vocabulary.
//! The overlap is controlled so that a linear classifier separates the
//! classes comfortably while word-level attacks on the few high-weight
//! tokens still flip documents.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Label, RawEmail};
use crate::rng::SeedSpace;

/// Spam-indicative words. Each spam email contains 3 or 4 of these.
pub const SPAM_POOL: &[&str] = &[
    "win",
    "cash",
    "prize",
    "free",
    "bonus",
    "lottery",
    "jackpot",
    "pills",
    "casino",
    "urgent",
    "winner",
    "claim",
    "reward",
    "discount",
    "cheap",
    "loan",
    "credit",
    "million",
    "bargain",
    "premium",
    "instant",
    "offer",
    "deal",
    "subscribe",
    "earn",
];

/// Office words appearing often in ham and rarely in spam.
pub const HAM_POOL: &[&str] = &[
    "meeting",
    "schedule",
    "report",
    "project",
    "agenda",
    "budget",
    "review",
    "lunch",
    "team",
    "draft",
    "deadline",
    "conference",
    "presentation",
    "feedback",
    "invoice",
    "travel",
    "office",
    "pantry",
    "manager",
    "client",
    "quarter",
    "update",
    "summary",
    "minutes",
    "notes",
    "calendar",
    "payroll",
    "printer",
    "desk",
    "folder",
    "archive",
    "staff",
    "intern",
    "memo",
    "policy",
    "training",
    "workshop",
    "session",
    "document",
    "vendor",
    "catering",
    "reminder",
];

/// Class-neutral filler, drawn equally by both classes.
pub const NEUTRAL_POOL: &[&str] = &[
    "cabin", "water", "light", "book", "road", "garden", "window", "table", "chair", "door",
    "floor", "wall", "river", "mountain", "city", "street", "music", "story", "picture", "paper",
    "letter", "phone", "computer", "screen", "keyboard", "coat", "shoe", "bridge", "forest",
    "valley", "island", "ocean", "branch", "stone", "metal", "glass", "cloth", "bread", "fruit",
    "apple", "orange", "lemon", "sugar", "plate", "bottle", "basket", "kitchen", "hill", "field",
    "farm", "rabbit", "sheep", "bird", "fish", "plant", "flower", "grass", "cloud", "storm",
    "winter", "spring", "autumn", "season", "month", "morning", "evening", "night", "dinner",
    "breakfast", "market", "shop", "store", "corner", "square", "circle", "middle", "north",
    "south", "east", "west", "color", "shape", "sound", "voice", "word", "page", "line", "title",
    "author", "reader", "artist", "painter", "camera", "journey", "ticket", "station", "airport",
    "engine", "wheel", "signal", "tower", "castle", "church", "school", "student", "teacher",
    "lesson", "pencil", "crayon", "notebook", "library", "museum", "theater", "concert", "ballet",
    "opera", "violin", "piano", "guitar", "drum", "dance", "song", "poem", "novel", "chapter",
    "stanza", "meadow", "pond", "lake", "beach", "sand", "wave", "boat", "sail", "anchor",
    "harbor", "captain", "sailor", "compass", "map", "globe", "country", "village", "cottage",
    "chimney", "roof", "cellar", "ladder", "hammer", "nail", "timber", "brick", "cement",
    "shovel", "bucket", "rope", "string", "candle", "lantern", "mirror", "carpet", "curtain",
    "pillow", "blanket",
];

const DOC_LEN_MIN: usize = 90;
const DOC_LEN_MAX: usize = 130;
const SENTENCE_LEN_MIN: usize = 6;
const SENTENCE_LEN_MAX: usize = 12;
/// Guaranteed ham-pool occurrences per ham email. The lower bound keeps a
/// ham document's evidence comfortably above any 3%-budget word attack.
const HAM_SIGNAL_MIN: usize = 8;
const HAM_SIGNAL_MAX: usize = 14;
/// Spam-keyword occurrences per spam email.
const SPAM_SIGNAL_MIN: usize = 3;
const SPAM_SIGNAL_MAX: usize = 4;
/// Ham-pool contamination rate inside spam emails.
const HAM_RATE_IN_SPAM: f64 = 0.03;
/// Fraction of spam emails carrying a keyword-stuffed pitch sentence.
const STUFFED_FRACTION: f64 = 0.10;
/// Keyword occurrences in a pitch sentence (plus 3 neutral words).
const PITCH_KEYWORDS: usize = 7;

/// Generate `n_spam` spam then `n_ham` ham emails. Each email draws from its
/// own `(seed, label, index)` substream, so a given email's text does not
/// depend on how many others were generated.
pub fn generate_synthetic_corpus(n_spam: usize, n_ham: usize, seed: u64) -> Vec<RawEmail> {
    let space = SeedSpace::new(seed);
    let mut corpus = Vec::with_capacity(n_spam + n_ham);
    for i in 0..n_spam {
        let id = format!("spam-{i:05}");
        let mut rng = space.stream(&["synthetic", "spam", &id]);
        corpus.push(RawEmail {
            id,
            label: Label::Spam,
            text: spam_text(&mut rng),
        });
    }
    for i in 0..n_ham {
        let id = format!("ham-{i:05}");
        let mut rng = space.stream(&["synthetic", "ham", &id]);
        corpus.push(RawEmail {
            id,
            label: Label::Ham,
            text: ham_text(&mut rng),
        });
    }
    corpus
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn body_word<'a>(rng: &mut ChaCha8Rng, ham_rate: f64) -> &'a str {
    if rng.gen_bool(ham_rate) {
        pick(rng, HAM_POOL)
    } else {
        pick(rng, NEUTRAL_POOL)
    }
}

fn spam_text(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(DOC_LEN_MIN..=DOC_LEN_MAX);
    let mut words: Vec<&str> = (0..len).map(|_| body_word(rng, HAM_RATE_IN_SPAM)).collect();
    let n_keywords = rng.gen_range(SPAM_SIGNAL_MIN..=SPAM_SIGNAL_MAX);
    let slots = crate::rng::sample_indices(rng, words.len(), n_keywords);
    for slot in slots {
        words[slot] = pick(rng, SPAM_POOL);
    }
    let mut sentences = chunk_sentences(rng, &words);
    if rng.gen_bool(STUFFED_FRACTION) {
        let mut pitch: Vec<&str> = (0..PITCH_KEYWORDS).map(|_| pick(rng, SPAM_POOL)).collect();
        for _ in 0..3 {
            pitch.push(pick(rng, NEUTRAL_POOL));
        }
        let at = rng.gen_range(0..=sentences.len());
        sentences.insert(at, (pitch, '!'));
    }
    render(&sentences)
}

fn ham_text(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(DOC_LEN_MIN..=DOC_LEN_MAX);
    let mut words: Vec<&str> = (0..len).map(|_| pick(rng, NEUTRAL_POOL)).collect();
    let n_signal = rng.gen_range(HAM_SIGNAL_MIN..=HAM_SIGNAL_MAX);
    let slots = crate::rng::sample_indices(rng, words.len(), n_signal);
    for slot in slots {
        words[slot] = pick(rng, HAM_POOL);
    }
    render(&chunk_sentences(rng, &words))
}

type Sentence<'a> = (Vec<&'a str>, char);

fn chunk_sentences<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> Vec<Sentence<'a>> {
    let mut sentences = Vec::new();
    let mut rest = words;
    while !rest.is_empty() {
        let take = rng
            .gen_range(SENTENCE_LEN_MIN..=SENTENCE_LEN_MAX)
            .min(rest.len());
        sentences.push((rest[..take].to_vec(), '.'));
        rest = &rest[take..];
    }
    sentences
}

fn render(sentences: &[Sentence<'_>]) -> String {
    let mut out = String::new();
    for (words, terminator) in sentences {
        if !out.is_empty() {
            out.push(' ');
        }
        for (i, w) in words.iter().enumerate() {
            if i == 0 {
                let mut chars = w.chars();
                if let Some(first) = chars.next() {
                    out.extend(first.to_uppercase());
                    out.push_str(chars.as_str());
                }
            } else {
                out.push(' ');
                out.push_str(w);
            }
        }
        out.push(*terminator);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{porter_stem, StopwordSet};
    use std::collections::HashSet;

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic_corpus(50, 50, 7);
        let b = generate_synthetic_corpus(50, 50, 7);
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(50, 50, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn counts_and_labels() {
        let corpus = generate_synthetic_corpus(0, 5, 1);
        assert_eq!(corpus.len(), 5);
        assert!(corpus.iter().all(|e| e.label == Label::Ham));
        assert!(generate_synthetic_corpus(0, 0, 1).is_empty());
    }

    #[test]
    fn email_text_is_independent_of_corpus_size() {
        let small = generate_synthetic_corpus(3, 3, 42);
        let large = generate_synthetic_corpus(10, 10, 42);
        assert_eq!(small[0], large[0]);
        assert_eq!(small[3], large[10]); // first ham email
    }

    /// The pools have to be stopword-free, stem-stable and stem-distinct,
    /// otherwise vocabulary features collide across classes.
    #[test]
    fn pools_are_clean_and_stem_distinct() {
        let sw = StopwordSet::default_english();
        let mut stems: HashSet<String> = HashSet::new();
        for word in SPAM_POOL
            .iter()
            .chain(HAM_POOL.iter())
            .chain(NEUTRAL_POOL.iter())
        {
            assert!(crate::lexicon::is_lower_alpha(word), "{word:?} not [a-z]+");
            assert!(!sw.contains(word), "{word} is a stopword");
            let stem = porter_stem(word);
            assert!(!sw.contains(&stem), "{word} stems to stopword {stem}");
            assert_eq!(porter_stem(&stem), stem, "{word} stem {stem} not stable");
            assert!(stems.insert(stem.clone()), "{word} collides on stem {stem}");
        }
        assert_eq!(stems.len(), SPAM_POOL.len() + HAM_POOL.len() + NEUTRAL_POOL.len());
    }

    #[test]
    fn spam_emails_contain_spam_keywords_ham_do_not() {
        let sw = StopwordSet::default_english();
        let spam_stems: HashSet<String> = SPAM_POOL.iter().map(|w| porter_stem(w)).collect();
        let corpus = generate_synthetic_corpus(40, 40, 11);
        for email in &corpus {
            let doc = crate::corpus::clean(email, &sw);
            let hits = doc
                .tokens
                .iter()
                .filter(|t| spam_stems.contains(*t))
                .count();
            match email.label {
                Label::Spam => assert!(hits >= 3, "{} has only {hits} keywords", email.id),
                Label::Ham => assert_eq!(hits, 0, "{} has spam keywords", email.id),
            }
        }
    }
}
