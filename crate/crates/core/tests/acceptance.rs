//! Runs every acceptance criterion and prints one line per criterion.

use blackhats::verify::{run_criterion, CRITERIA};

#[test]
fn acceptance() {
    let results: Vec<_> = CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "{}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
