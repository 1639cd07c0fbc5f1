//! BLEU4, both METEOR formulas, and corpus versus sentence-mean
//! aggregation on a handful of summaries.
//!
//! ```bash
//! cargo run --example evaluate_metrics
//! ```

use evsumm::metrics::{
    align, bleu4, evaluate, meteor, modified_ngram_precision, sentence_bleu, Aggregation, EvalConfig, MeteorMode,
};
use evsumm::tokenizer::{tokenize, Origin};

fn toks(s: &str) -> Vec<String> {
    tokenize(s, Origin::Comment).tokens
}

fn main() -> anyhow::Result<()> {
    let pairs = [
        ("Sends a message to the specified service.", "Sends a message to the specified service."),
        ("Sends the message to a service.", "Sends a message to the specified service."),
        ("Called when a view is clicked.", "Called whenever a view has been clicked."),
        ("Returns the number of rows.", "Returns the number of items in the list."),
    ];
    let cands: Vec<Vec<String>> = pairs.iter().map(|(c, _)| toks(c)).collect();
    let refs: Vec<Vec<String>> = pairs.iter().map(|(_, r)| toks(r)).collect();

    println!("{:<42} {:>7} {:>8} {:>8}", "candidate", "BLEU4", "M-literal", "M-std");
    for (c, r) in cands.iter().zip(&refs) {
        println!(
            "{:<42} {:>7.4} {:>8.4} {:>8.4}",
            c.join(" "),
            sentence_bleu(c, r, false),
            meteor(c, r, MeteorMode::PaperLiteral),
            meteor(c, r, MeteorMode::Standard)
        );
    }

    println!("\ncorpus BLEU4:        {:.4}", bleu4(&cands, &refs, Aggregation::Corpus, false)?);
    println!("mean sentence BLEU4: {:.4}", bleu4(&cands, &refs, Aggregation::MeanOfSentences, false)?);
    println!("smoothed mean BLEU4: {:.4}", bleu4(&cands, &refs, Aggregation::MeanOfSentences, true)?);

    let (c, r) = (&cands[2], &refs[2]);
    println!("\nunigram precision of {:?}: {:?}", c.join(" "), modified_ngram_precision(c, r, 1));
    let a = align(c, r, 12);
    println!("alignment {:?}, {} chunks", a.pairs, a.chunks);

    let report = evaluate(None, &cands, &refs, &EvalConfig { both_meteor_modes: true, ..Default::default() })?;
    println!("\nreport: BLEU4 {:.4}, METEOR {:.4} ({:?}), other mode {:.4?}", report.bleu4, report.meteor, report.meteor_mode, report.meteor_alt);
    Ok(())
}
