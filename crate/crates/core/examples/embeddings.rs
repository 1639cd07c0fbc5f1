//! Load GloVe-format vectors and initialize a model's embedding rows from
//! them. Words without a vector get a uniform random one; a word in both
//! vocabularies starts from the same vector.
//!
//! ```bash
//! cargo run --example embeddings
//! ```

use evsumm::corpus::build_vocab;
use evsumm::embeddings::EmbeddingTable;
use evsumm::model::{init_params, ModelConfig};

const GLOVE: &str = "\
message 0.1 -0.2 0.3 0.05
send -0.4 0.1 0.0 0.2
view 0.3 0.3 -0.1 -0.2
";

fn main() -> anyhow::Result<()> {
    let table = EmbeddingTable::from_reader(GLOVE.as_bytes())?;
    println!("{} pretrained vectors of dimension {}", table.len(), table.dimension());

    let words = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    let code = [words("public void send message ( view view )")];
    let comment = [words("sends a message")];
    let code_vocab = build_vocab(code.iter().map(Vec::as_slice), None, 1)?;
    let comment_vocab = build_vocab(comment.iter().map(Vec::as_slice), None, 1)?;

    let config = ModelConfig {
        embedding_dim: 4,
        hidden_dim: 8,
        code_vocab: code_vocab.len(),
        comment_vocab: comment_vocab.len(),
        freeze_pretrained: true,
        ..Default::default()
    };
    let (params, frozen) = init_params(&config, &code_vocab, &comment_vocab, Some(&table))?;
    for (id, tok) in code_vocab.tokens().iter().enumerate() {
        let tag = if frozen.src[id] { "pretrained" } else { "random" };
        println!("{tok:>8} {tag:>10} {:?}", params.src_embed.row(id));
    }
    let shared = comment_vocab.id("message") as usize;
    println!(
        "\n\"message\" shares its vector across vocabularies: {}",
        params.tgt_embed.row(shared) == params.src_embed.row(code_vocab.id("message") as usize)
    );
    Ok(())
}
