use maslovlab::maslov::MaslovOptions;
use maslovlab::verification::{run_suite, suites};

#[test]
fn every_battery_passes_a_short_run() {
    let opts = MaslovOptions::default();
    for suite in suites() {
        let r = run_suite(suite, 6, 99, &opts);
        println!("{:<18} {:>3} {:>3} {:.2}s {:?}", r.suite, r.trials, r.failures, r.seconds, r.first_failure);
        assert!(r.passed(), "{}: {:?}", r.suite, r.first_failure);
    }
}
