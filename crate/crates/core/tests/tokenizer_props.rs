mod common;

use evsumm::tokenizer::{split_identifier, tokenize, Origin};
use proptest::prelude::*;

fn identifier() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,24}"
}

proptest! {
    #[test]
    fn tokenizing_twice_changes_nothing(text in "[ -~\n]{0,80}") {
        for origin in [Origin::Code, Origin::Comment] {
            let once = tokenize(&text, origin);
            let twice = tokenize(&once.joined(), origin);
            prop_assert_eq!(once.tokens, twice.tokens);
        }
    }

    #[test]
    fn identifiers_split_like_the_regex(ident in identifier()) {
        prop_assume!(ident.chars().any(|c| c.is_ascii_alphabetic()));
        prop_assert_eq!(split_identifier(&ident), common::identifier_oracle(&ident));
    }

    #[test]
    fn subtokens_cover_the_identifier(ident in identifier()) {
        prop_assume!(ident.chars().any(|c| c.is_ascii_alphabetic()));
        let parts = split_identifier(&ident);
        let letters: String = ident.chars().filter(|c| *c != '_').collect::<String>().to_lowercase();
        prop_assert_eq!(parts.concat(), letters);
        prop_assert!(parts.iter().all(|p| !p.is_empty() && !p.contains('_')));
    }

    #[test]
    fn tokens_have_no_whitespace(text in "\\PC{0,60}") {
        let seq = tokenize(&text, Origin::Code);
        prop_assert!(seq.tokens.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
    }
}

#[test]
fn camel_case_goldens() {
    let cases: &[(&str, &[&str])] = &[
        ("SQLDatabase", &["sql", "database"]),
        ("getHTTPResponseCode", &["get", "http", "response", "code"]),
        ("parseURL", &["parse", "url"]),
        ("MAX_VALUE", &["max", "value"]),
        ("utf8Decoder", &["utf", "8", "decoder"]),
        ("x", &["x"]),
        ("IOError", &["io", "error"]),
    ];
    for (ident, want) in cases {
        assert_eq!(split_identifier(ident), *want, "{ident}");
        assert_eq!(common::identifier_oracle(ident), *want, "oracle on {ident}");
    }
}

#[test]
fn comment_markers_are_removed() {
    let text = "/**\n * Sends a message.\n * @param view the view\n */";
    let toks = tokenize(text, Origin::Comment).tokens;
    assert_eq!(toks.first().map(String::as_str), Some("sends"));
    assert!(!toks.iter().any(|t| t == "/" || t == "*" || t == "/**"));
}

#[test]
fn method_signature_golden() {
    let toks = tokenize("public void sendMessage(View view)", Origin::Code).tokens;
    assert_eq!(toks, ["public", "void", "send", "message", "(", "view", "view", ")"]);
}
