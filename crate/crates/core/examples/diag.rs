//! scratch diagnostic, not part of the artifact
use mailsting::corpus::*;
use mailsting::lexicon::*;
use mailsting::models::*;
use mailsting::scoring::*;
use std::collections::HashSet;

fn main() {
    let sw = StopwordSet::default_english();
    let corpus = generate_synthetic_corpus(1000, 1000, 7);
    let (train, test) = split_corpus(&corpus, 0.2, 1).unwrap();
    let train_docs: Vec<_> = train.iter().map(|r| clean(r, &sw)).collect();
    let test_docs: Vec<_> = test.iter().map(|r| clean(r, &sw)).collect();
    let vocab = build_vocabulary(&train_docs, 50_000, 350);
    println!("vocab tokens: {}", vocab.token_count());
    let model = train_naive_bayes(&train_docs, &vocab, 1.0).unwrap();
    let oracle = OracleHandle::native(NativeModel::NaiveBayes(model.clone()));
    let table = build_spam_weights(&oracle, &vocab).unwrap();

    let spam_stems: HashSet<String> = SPAM_POOL.iter().map(|w| porter_stem(w)).collect();
    let ham_stems: HashSet<String> = HAM_POOL.iter().map(|w| porter_stem(w)).collect();
    println!("SW(win stem)={:?} SW(meet)={:?} SW(water)={:?}",
        table.get(&porter_stem("win")), table.get(&porter_stem("meeting")), table.get("water"));

    let policy = SelectionPolicy::new(SelectionLevel::Word, 0.03).unwrap();
    let mut flips = 0; let mut spam_total = 0;
    let mut k_hist = [0usize; 10];
    let mut noflip_examples = 0;
    for doc in test_docs.iter().filter(|d| d.label == Label::Spam) {
        spam_total += 1;
        let kw_count = doc.tokens.iter().filter(|t| spam_stems.contains(*t)).count();
        k_hist[kw_count.min(9)] += 1;
        let targets = select_target_words(doc, Scores::Table(&table), &policy);
        let mut attacked = doc.clone();
        for &p in &targets { attacked.tokens[p] = UNK_SURFACE.to_string(); }
        let before = model.predict(doc);
        let after = model.predict(&attacked);
        let flipped = after < 0.5;
        if flipped { flips += 1; }
        else if noflip_examples < 6 && kw_count <= 4 {
            noflip_examples += 1;
            let contam = doc.tokens.iter().filter(|t| ham_stems.contains(*t)).count();
            let targeted_kws = targets.iter().filter(|&&p| spam_stems.contains(&doc.tokens[p])).count();
            println!("NOFLIP {}: kw={kw_count} targeted_kw={targeted_kws} k={} contam={contam} before={before:.4} after={after:.4}",
                doc.id, targets.len());
        }
    }
    println!("spam flip rate: {flips}/{spam_total}");
    println!("kw-count histogram: {k_hist:?}");
}
