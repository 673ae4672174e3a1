//! Runs the eight reproduction criteria and prints one line per criterion.
//! Exits non-zero if any criterion fails.

use squarepeg::reproduce::{run_criterion, Workbench, CRITERIA};

fn main() {
    let bench = Workbench::default();
    let mut failed = Vec::new();
    for id in CRITERIA {
        let row = run_criterion(id, &bench);
        println!("{row}");
        if !row.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
