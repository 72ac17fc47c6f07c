//! Character-level perturbation operators.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::sample_indices;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharOp {
    Swap,
    Delete,
    Insert,
    Replace,
}

impl CharOp {
    pub fn name(self) -> &'static str {
        match self {
            CharOp::Swap => "swap",
            CharOp::Delete => "delete",
            CharOp::Insert => "insert",
            CharOp::Replace => "replace",
        }
    }
}

pub const DEFAULT_CHAR_FRACTION: f64 = 0.30;

/// Operator plus the fraction of a word's characters it may touch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharAttackKind {
    pub op: CharOp,
    pub fraction: f64,
}

impl CharAttackKind {
    pub fn new(op: CharOp, fraction: f64) -> crate::error::Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(crate::error::Error::Validation(format!(
                "char fraction must be in (0, 1], got {fraction}"
            )));
        }
        Ok(CharAttackKind { op, fraction })
    }

    /// Characters affected for a word of `len`: max(1, round-half-up).
    pub fn budget(&self, len: usize) -> usize {
        ((self.fraction * len as f64).round() as usize).max(1)
    }
}

/// Outcome of perturbing one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CharPerturbation {
    Applied { word: String, chars_affected: usize },
    /// Word too short for the operator; left unmodified.
    Skipped,
}

/// Perturb `m = max(1, round(fraction * len))` characters of the word.
/// Positions are drawn uniformly without replacement. Swap and delete need
/// at least two characters; too-short words are skipped, never errors.
pub fn perturb_word_chars(
    word: &str,
    kind: &CharAttackKind,
    rng: &mut ChaCha8Rng,
) -> CharPerturbation {
    let bytes = word.as_bytes();
    let len = bytes.len();
    let min_len = match kind.op {
        CharOp::Swap | CharOp::Delete => 2,
        CharOp::Insert | CharOp::Replace => 1,
    };
    if len < min_len {
        return CharPerturbation::Skipped;
    }
    let m = kind.budget(len);
    let out = match kind.op {
        CharOp::Swap => {
            let mut chars = bytes.to_vec();
            // each picked position trades with its right neighbor; the last
            // position has none and trades left instead
            for p in sample_indices(rng, len, m) {
                if p + 1 < len {
                    chars.swap(p, p + 1);
                } else {
                    chars.swap(p - 1, p);
                }
            }
            chars
        }
        CharOp::Delete => {
            let doomed = sample_indices(rng, len, m);
            let mut chars = Vec::with_capacity(len - m);
            let mut cursor = doomed.iter().peekable();
            for (i, &b) in bytes.iter().enumerate() {
                if cursor.peek() == Some(&&i) {
                    cursor.next();
                } else {
                    chars.push(b);
                }
            }
            chars
        }
        CharOp::Insert => {
            let slots = sample_indices(rng, len + 1, m);
            let letters: Vec<u8> = (0..m).map(|_| random_letter(rng)).collect();
            let mut chars = bytes.to_vec();
            // splice from the highest slot down so earlier slots stay valid
            for (slot, letter) in slots.into_iter().zip(letters).rev() {
                chars.insert(slot, letter);
            }
            chars
        }
        CharOp::Replace => {
            let mut chars = bytes.to_vec();
            for p in sample_indices(rng, len, m) {
                chars[p] = different_letter(rng, chars[p]);
            }
            chars
        }
    };
    CharPerturbation::Applied {
        word: String::from_utf8(out).expect("ascii perturbations"),
        chars_affected: m,
    }
}

fn random_letter(rng: &mut ChaCha8Rng) -> u8 {
    b'a' + rng.gen_range(0..26u8)
}

/// Uniform over the 25 lowercase letters other than `original`.
fn different_letter(rng: &mut ChaCha8Rng, original: u8) -> u8 {
    if !original.is_ascii_lowercase() {
        return random_letter(rng);
    }
    let offset = rng.gen_range(1..26u8);
    b'a' + (original - b'a' + offset) % 26
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpace;

    fn rng(tag: &str) -> ChaCha8Rng {
        SeedSpace::new(1234).stream(&["chars-test", tag])
    }

    fn sorted_bytes(s: &str) -> Vec<u8> {
        let mut v = s.as_bytes().to_vec();
        v.sort_unstable();
        v
    }

    fn applied(p: CharPerturbation) -> (String, usize) {
        match p {
            CharPerturbation::Applied {
                word,
                chars_affected,
            } => (word, chars_affected),
            CharPerturbation::Skipped => panic!("unexpected skip"),
        }
    }

    #[test]
    fn swap_at_ten_percent_is_one_adjacent_transposition() {
        let kind = CharAttackKind::new(CharOp::Swap, 0.10).unwrap();
        let (word, m) = applied(perturb_word_chars("localhost", &kind, &mut rng("swap")));
        assert_eq!(m, 1);
        assert_eq!(word.len(), 9);
        assert_eq!(sorted_bytes(&word), sorted_bytes("localhost"));
        let diffs: Vec<usize> = word
            .bytes()
            .zip("localhost".bytes())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect();
        // either the identity transposition of equal letters or two adjacent cells
        assert!(diffs.is_empty() || (diffs.len() == 2 && diffs[1] == diffs[0] + 1));
    }

    #[test]
    fn delete_at_fifty_percent_removes_half_rounded_up() {
        let kind = CharAttackKind::new(CharOp::Delete, 0.50).unwrap();
        let (word, m) = applied(perturb_word_chars("localhost", &kind, &mut rng("del")));
        assert_eq!(m, 5); // round(4.5) rounds half up
        assert_eq!(word.len(), 4);
    }

    #[test]
    fn insert_at_ten_percent_adds_one_letter() {
        let kind = CharAttackKind::new(CharOp::Insert, 0.10).unwrap();
        let (word, m) = applied(perturb_word_chars("localhost", &kind, &mut rng("ins")));
        assert_eq!(m, 1);
        assert_eq!(word.len(), 10);
        // removing the inserted character recovers the original
        let recoverable = (0..word.len()).any(|i| {
            let mut w = word.clone();
            w.remove(i);
            w == "localhost"
        });
        assert!(recoverable, "{word}");
    }

    #[test]
    fn replace_changes_exactly_m_positions() {
        let kind = CharAttackKind::new(CharOp::Replace, 0.30).unwrap();
        let (word, m) = applied(perturb_word_chars("localhost", &kind, &mut rng("rep")));
        assert_eq!(m, 3);
        assert_eq!(word.len(), 9);
        let diffs = word
            .bytes()
            .zip("localhost".bytes())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diffs, 3);
    }

    #[test]
    fn short_words_are_skipped_for_swap_and_delete() {
        let swap = CharAttackKind::new(CharOp::Swap, 0.3).unwrap();
        let delete = CharAttackKind::new(CharOp::Delete, 0.3).unwrap();
        let insert = CharAttackKind::new(CharOp::Insert, 0.3).unwrap();
        assert_eq!(
            perturb_word_chars("a", &swap, &mut rng("s1")),
            CharPerturbation::Skipped
        );
        assert_eq!(
            perturb_word_chars("a", &delete, &mut rng("d1")),
            CharPerturbation::Skipped
        );
        assert!(matches!(
            perturb_word_chars("a", &insert, &mut rng("i1")),
            CharPerturbation::Applied { .. }
        ));
    }

    #[test]
    fn same_stream_gives_identical_perturbations() {
        let kind = CharAttackKind::new(CharOp::Replace, 0.5).unwrap();
        let a = perturb_word_chars("deterministic", &kind, &mut rng("same"));
        let b = perturb_word_chars("deterministic", &kind, &mut rng("same"));
        assert_eq!(a, b);
    }

    #[test]
    fn operator_properties_hold_over_random_words() {
        use rand::Rng;
        let mut meta = rng("meta");
        for case in 0..800 {
            let len = meta.gen_range(1..=12);
            let word: String = (0..len)
                .map(|_| char::from(b'a' + meta.gen_range(0..26u8)))
                .collect();
            let fraction = meta.gen_range(0.05..=1.0);
            for op in [CharOp::Swap, CharOp::Delete, CharOp::Insert, CharOp::Replace] {
                let kind = CharAttackKind { op, fraction };
                let mut stream = rng(&format!("case-{case}-{}", op.name()));
                match perturb_word_chars(&word, &kind, &mut stream) {
                    CharPerturbation::Skipped => {
                        assert!(word.len() < 2 && matches!(op, CharOp::Swap | CharOp::Delete));
                    }
                    CharPerturbation::Applied {
                        word: out,
                        chars_affected: m,
                    } => {
                        assert_eq!(m, kind.budget(word.len()));
                        match op {
                            CharOp::Swap => {
                                assert_eq!(out.len(), word.len());
                                assert_eq!(sorted_bytes(&out), sorted_bytes(&word));
                            }
                            CharOp::Delete => assert_eq!(out.len(), word.len() - m),
                            CharOp::Insert => assert_eq!(out.len(), word.len() + m),
                            CharOp::Replace => {
                                assert_eq!(out.len(), word.len());
                                let diffs = out
                                    .bytes()
                                    .zip(word.bytes())
                                    .filter(|(a, b)| a != b)
                                    .count();
                                assert_eq!(diffs, m);
                            }
                        }
                    }
                }
            }
        }
    }
}
