use lolight3::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria pass", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
