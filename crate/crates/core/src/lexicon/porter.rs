//! Porter suffix-stripping stemmer.
//!
//! Steps 1a through 5b of the classic algorithm, with the two departures
//! most implementations ship: words of length <= 2 are returned untouched,
//! and step 1c rewrites a final `y` to `i` only when the `y` follows a
//! consonant in a vowel-bearing stem ("money", "enjoy" and "sky" keep
//! their `y`, "happy" becomes "happi").
//! Within a step the longest matching suffix is the only rule considered;
//! if its condition fails no rule in that step fires.

/// Stem a lowercase alphabetic word.
pub fn porter_stem(word: &str) -> String {
    debug_assert!(
        !word.is_empty() && word.bytes().all(|b| b.is_ascii_lowercase()),
        "porter_stem expects [a-z]+, got {word:?}"
    );
    if word.len() <= 2 {
        return word.to_string();
    }
    let mut w = word.as_bytes().to_vec();
    step_1a(&mut w);
    step_1b(&mut w);
    step_1c(&mut w);
    step_2(&mut w);
    step_3(&mut w);
    step_4(&mut w);
    step_5a(&mut w);
    step_5b(&mut w);
    String::from_utf8(w).expect("ascii in, ascii out")
}

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The measure m: number of vowel->consonant transitions in [C](VC)^m[V].
fn measure(w: &[u8]) -> usize {
    let n = w.len();
    let mut m = 0;
    let mut i = 0;
    while i < n && is_consonant(w, i) {
        i += 1;
    }
    loop {
        while i < n && !is_consonant(w, i) {
            i += 1;
        }
        if i == n {
            return m;
        }
        m += 1;
        while i < n && is_consonant(w, i) {
            i += 1;
        }
        if i == n {
            return m;
        }
    }
}

fn contains_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// *o condition: stem ends consonant-vowel-consonant and the final
/// consonant is not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn ends_with(w: &[u8], suffix: &str) -> bool {
    w.len() >= suffix.len() && &w[w.len() - suffix.len()..] == suffix.as_bytes()
}

fn truncate_suffix(w: &mut Vec<u8>, suffix: &str) {
    let keep = w.len() - suffix.len();
    w.truncate(keep);
}

fn replace_suffix(w: &mut Vec<u8>, suffix: &str, replacement: &str) {
    truncate_suffix(w, suffix);
    w.extend_from_slice(replacement.as_bytes());
}

fn step_1a(w: &mut Vec<u8>) {
    if ends_with(w, "sses") {
        truncate_suffix(w, "es");
    } else if ends_with(w, "ies") {
        truncate_suffix(w, "es");
    } else if ends_with(w, "ss") {
        // keep
    } else if ends_with(w, "s") {
        truncate_suffix(w, "s");
    }
}

fn step_1b(w: &mut Vec<u8>) {
    if ends_with(w, "eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            truncate_suffix(w, "d");
        }
        return;
    }
    let stripped = if ends_with(w, "ed") && contains_vowel(&w[..w.len() - 2]) {
        truncate_suffix(w, "ed");
        true
    } else if ends_with(w, "ing") && contains_vowel(&w[..w.len() - 3]) {
        truncate_suffix(w, "ing");
        true
    } else {
        false
    };
    if !stripped {
        return;
    }
    if ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push(b'e');
    }
}

fn step_1c(w: &mut Vec<u8>) {
    let n = w.len();
    if n >= 3
        && w[n - 1] == b'y'
        && is_consonant(w, n - 2)
        && contains_vowel(&w[..n - 1])
    {
        w[n - 1] = b'i';
    }
}

const STEP_2_RULES: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP_3_RULES: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

/// Longest matching suffix wins; apply the replacement only if the stem
/// measure condition holds. No fallback to shorter matches.
fn apply_longest(w: &mut Vec<u8>, rules: &[(&str, &str)], min_measure: usize) {
    let mut best: Option<(&str, &str)> = None;
    for &(suffix, repl) in rules {
        if ends_with(w, suffix) && best.map_or(true, |(s, _)| suffix.len() > s.len()) {
            best = Some((suffix, repl));
        }
    }
    if let Some((suffix, repl)) = best {
        if measure(&w[..w.len() - suffix.len()]) > min_measure {
            replace_suffix(w, suffix, repl);
        }
    }
}

fn step_2(w: &mut Vec<u8>) {
    apply_longest(w, STEP_2_RULES, 0);
}

fn step_3(w: &mut Vec<u8>) {
    apply_longest(w, STEP_3_RULES, 0);
}

const STEP_4_SUFFIXES: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou",
    "ism", "ate", "iti", "ous", "ive", "ize",
];

fn step_4(w: &mut Vec<u8>) {
    let mut best: Option<&str> = None;
    for &suffix in STEP_4_SUFFIXES {
        if ends_with(w, suffix) && best.map_or(true, |s| suffix.len() > s.len()) {
            best = Some(suffix);
        }
    }
    if let Some(suffix) = best {
        let stem = &w[..w.len() - suffix.len()];
        let ok = measure(stem) > 1
            && (suffix != "ion" || matches!(stem.last(), Some(b's') | Some(b't')));
        if ok {
            truncate_suffix(w, suffix);
        }
    }
}

fn step_5a(w: &mut Vec<u8>) {
    if !ends_with(w, "e") {
        return;
    }
    let stem = &w[..w.len() - 1];
    let m = measure(stem);
    if m > 1 || (m == 1 && !ends_cvc(stem)) {
        w.pop();
    }
}

fn step_5b(w: &mut Vec<u8>) {
    if measure(w) > 1 && ends_double_consonant(w) && w[w.len() - 1] == b'l' {
        w.pop();
    }
}
