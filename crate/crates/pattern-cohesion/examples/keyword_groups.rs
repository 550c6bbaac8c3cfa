//! Treats keyword groups as patterns over documents: a keyword's count is
//! the number of documents containing it, the group count is the number of
//! documents considered, and cohesion tells good groupings from mixed ones.

use std::error::Error;

use pattern_cohesion::pattern_cohesion;

struct Corpus<'a> {
    keywords: &'a [&'a str],
    // one row per document, one flag per keyword
    presence: &'a [&'a [u8]],
}

impl Corpus<'_> {
    fn keyword_count(&self, k: usize) -> f64 {
        self.presence.iter().map(|doc| f64::from(doc[k])).sum()
    }

    fn score_group(&self, group: &[usize]) -> Result<f64, Box<dyn Error>> {
        let counts: Vec<f64> = group.iter().map(|&k| self.keyword_count(k)).collect();
        let lav = counts.iter().sum::<f64>() / counts.len() as f64;
        let gav = self.presence.len() as f64;
        Ok(pattern_cohesion(&counts, lav, gav)?.cohesion)
    }
}

fn main() -> Result<(), Box<dyn Error>> {
    let corpus = Corpus {
        keywords: &["ledger", "audit", "invoice", "espresso", "quasar"],
        presence: &[
            &[1, 1, 0, 1, 0],
            &[1, 0, 1, 0, 0],
            &[1, 1, 1, 0, 0],
            &[0, 1, 1, 0, 1],
            &[0, 0, 0, 1, 0],
        ],
    };

    for (k, word) in corpus.keywords.iter().enumerate() {
        println!("'{word}' appears in {} of {} documents", corpus.keyword_count(k), corpus.presence.len());
    }
    println!();

    // the accounting trio shares a balanced three-of-five footprint
    let accounting = [0usize, 1, 2];
    println!(
        "group [ledger, audit, invoice]: cohesion {:.4}",
        corpus.score_group(&accounting)?
    );

    // swapping in an off-topic keyword drags the score down
    let mixed = [0usize, 1, 3];
    println!("group [ledger, audit, espresso]: cohesion {:.4}", corpus.score_group(&mixed)?);

    // a keyword set present in every document would be perfectly cohesive
    let everywhere = vec![5.0; 3];
    let perfect = pattern_cohesion(&everywhere, 5.0, 5.0)?;
    println!("keywords present in all five documents: cohesion {:.4}", perfect.cohesion);
    Ok(())
}
