//! Filter raw comment/code pairs, build vocabularies, split the corpus and
//! encode one pair into the fixed-length id arrays the model consumes.
//!
//! ```bash
//! cargo run --example preprocess_corpus
//! ```

use std::path::Path;

use evsumm::corpus::{
    build_vocab, corpus_stats, preprocess, read_raw_pairs, split_dataset, FilterConfig, PairRecord, RawPair,
};

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy/pairs.jsonl");
    let mut raw = read_raw_pairs(&path)?;

    // A few pairs the filters should reject.
    let reject = |id: &str, code: &str, comment: &str| RawPair {
        id: id.into(),
        code: code.into(),
        comment: comment.into(),
    };
    raw.push(reject("gen", "void f() {}", "Auto-generated method stub, do not edit."));
    raw.push(reject("short", "void g() {}", "Getter."));
    raw.push(reject("cjk", "void h() {}", "返回用户的名字和年龄信息"));

    let (pairs, summary) = preprocess(&raw, &FilterConfig::default());
    println!("read {}, kept {}, dropped {:?}", summary.read, summary.kept, summary.dropped);
    if let Some(stats) = corpus_stats(&pairs) {
        println!("comment length: mean {:.1}, quartiles {} / {} / {}", stats.comment.mean, stats.comment.q1, stats.comment.q2, stats.comment.q3);
        println!("code length:    mean {:.1}, quartiles {} / {} / {}", stats.code.mean, stats.code.q1, stats.code.q2, stats.code.q3);
    }

    let ids: Vec<String> = pairs.iter().map(|p| p.id.clone()).collect();
    let split = split_dataset(&ids, (0.8, 0.1, 0.1), 42)?;
    println!("split: {} train / {} valid / {} test", split.train.len(), split.valid.len(), split.test.len());

    let code_vocab = build_vocab(pairs.iter().map(|p| p.code_tokens.as_slice()), None, 1)?;
    let comment_vocab = build_vocab(pairs.iter().map(|p| p.comment_tokens.as_slice()), None, 1)?;
    println!("vocabularies: {} code tokens, {} comment tokens", code_vocab.len(), comment_vocab.len());
    println!("most frequent comment tokens: {:?}", &comment_vocab.tokens()[4..12]);

    let record = PairRecord::encode(&pairs[0], &code_vocab, &comment_vocab)?;
    println!("\n{}", record.id);
    println!("comment ids: {:?}", &record.comment_ids[..12]);
    println!("code ids:    {:?} ... ({} slots)", &record.code_ids[..12], record.code_ids.len());
    Ok(())
}
