//! Greedy decoding versus beam search on a hand-built next-token model
//! where the locally best first word leads to a poor sentence.
//!
//! ```bash
//! cargo run --example beam_search
//! ```

use evsumm::model::{beam_decode, greedy_decode, sequence_score, BeamConfig, StepModel};

const WORDS: [&str; 7] = ["<pad>", "<unk>", "<sos>", "<eos>", "returns", "gets", "value"];

/// Next-token probabilities depend only on the previous token.
struct Bigram;

impl StepModel for Bigram {
    type State = ();

    fn start(&self) {}

    fn step(&self, prev: u32, _: &()) -> (Vec<f64>, ()) {
        // Columns follow WORDS.
        let p: [f64; 7] = match WORDS[prev as usize] {
            "<sos>" => [0.0, 0.0, 0.0, 0.0, 0.4, 0.6, 0.0],
            // "returns" is nearly always followed by "value" then EOS...
            "returns" => [0.0, 0.0, 0.0, 0.05, 0.0, 0.0, 0.95],
            // ...while "gets" is a weak start for anything.
            "gets" => [0.0, 0.0, 0.0, 0.3, 0.0, 0.35, 0.35],
            "value" => [0.0, 0.0, 0.0, 0.9, 0.05, 0.05, 0.0],
            _ => [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        };
        (p.iter().map(|x| x.ln()).collect(), ())
    }
}

fn show(name: &str, tokens: &[u32], score: f64) {
    let words: Vec<&str> = tokens.iter().map(|&t| WORDS[t as usize]).collect();
    println!("{name:>8}: {:<22} log p = {score:.4}", words.join(" "));
}

fn main() {
    let greedy = greedy_decode(&Bigram, 10);
    show("greedy", &greedy.tokens, greedy.score);
    for width in [1, 2, 5] {
        let cfg = BeamConfig {
            width,
            max_steps: 10,
            length_normalization: false,
        };
        let d = beam_decode(&Bigram, &cfg);
        show(&format!("beam {width}"), &d.tokens, d.score);
    }
    let best = [4, 6];
    println!("\nscore of \"returns value\" rescored directly: {:.4}", sequence_score(&Bigram, &best, true));
}
