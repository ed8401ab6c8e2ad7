//! Runs the full verification suite and prints one line per criterion.

use geodesic_mobility::acceptance;

#[test]
fn acceptance_suite() {
    let results = acceptance::run_all();
    for r in &results {
        println!(
            "[{}] criterion {:2} — {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.note
        );
    }
    assert!(
        acceptance::all_pass(&results),
        "{} of {} criteria failed",
        results.iter().filter(|r| !r.pass).count(),
        results.len()
    );
}
