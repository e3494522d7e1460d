//! Labeled positive and adversarial negative samples for each benchmark language.

use ptlc::langsuite::{corpus, generate, LanguageId};

fn main() {
    for id in LanguageId::ALL {
        let rows = corpus(id, &[8], 2, 42);
        let shown: Vec<String> =
            rows.iter().map(|r| format!("{}{}", if r.label { "+" } else { "-" }, r.string)).collect();
        println!("{:<9} {}", id.name(), shown.join("  "));
    }
    match generate(LanguageId::Dyck11, 5, true, 0) {
        Ok(w) => println!("unexpected sample {w:?}"),
        Err(e) => println!("\n{e}"),
    }
    let rows = corpus(LanguageId::Lt2, &[6], 2, 7);
    println!("\nTSV:");
    for r in rows {
        println!("{}", r.to_tsv());
    }
}
