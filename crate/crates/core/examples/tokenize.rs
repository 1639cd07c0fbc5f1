//! Tokenize code and comments the way the training corpus sees them.
//!
//! ```bash
//! cargo run --example tokenize
//! cargo run --example tokenize -- 'int parseHTTPResponseV2(String rawBody)'
//! ```

use evsumm::tokenizer::{split_identifier, tokenize, Origin};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if !args.is_empty() {
        println!("{}", tokenize(&args.join(" "), Origin::Code).joined());
        return;
    }

    for ident in ["SQLDatabase", "sendMessage", "HTTPServerV2", "MAX_VALUE", "__init__"] {
        println!("{ident:>14} -> {:?}", split_identifier(ident));
    }

    let code = "public void sendMessage(View view) {\n    startActivity(intent);}";
    println!("\ncode:    {}", tokenize(code, Origin::Code).joined());

    let comment = "/**\n * Sends a message to the specified service.\n */";
    println!("comment: {}", tokenize(comment, Origin::Comment).joined());
}
