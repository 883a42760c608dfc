use std::process::ExitCode;
use std::time::Instant;

use maslovlab::bvp::{desuspension_check, splitting_check, BoundaryCondition, BvpOptions, HamiltonianFamily};
use maslovlab::maslov::{maslov_crossings, maslov_winding, MaslovOptions};
use maslovlab::verification::{benchmark_path, find_suite, run_suite};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn batteries(names: &[(&str, usize)], opts: &MaslovOptions) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, trials) in names {
        let r = run_suite(find_suite(name).expect("registered suite"), *trials, SEED, opts);
        pass &= r.passed();
        parts.push(format!("{} {}/{} failed", r.suite, r.failures, r.trials));
        if let Some(f) = r.first_failure {
            parts.push(format!("({f})"));
        }
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn benchmark(opts: &MaslovOptions) -> Outcome {
    let path = benchmark_path();
    match (maslov_winding(&path, opts), maslov_crossings(&path, opts)) {
        (Ok(w), Ok(x)) => Outcome {
            pass: (w.mas_plus, w.mas_minus, x.mas_plus, x.mas_minus) == (1, 1, 1, 1),
            detail: format!("winding ({}, {}), crossing ({}, {})", w.mas_plus, w.mas_minus, x.mas_plus, x.mas_minus),
        },
        (w, x) => Outcome { pass: false, detail: format!("{:?} / {:?}", w.err(), x.err()) },
    }
}

fn desuspension(opts: &MaslovOptions) -> Outcome {
    let bvp = BvpOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    let scalar = HamiltonianFamily::scalar_shift();
    let periodic = BoundaryCondition::periodic(&scalar);
    let start = Instant::now();
    match desuspension_check(&scalar, move |_| periodic.clone(), &bvp, opts) {
        Ok(r) => {
            let secs = start.elapsed().as_secs_f64();
            pass &= r.sf == 1 && r.neg_mas == 1 && secs < 10.0;
            parts.push(format!("scalar periodic sf {} -Mas {} in {secs:.2}s", r.sf, r.neg_mas));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("scalar: {e}"));
        }
    }
    let planar = HamiltonianFamily::planar_shift();
    let dirichlet = BoundaryCondition::dirichlet_first(&planar).expect("Lagrangian");
    let modulated = HamiltonianFamily::planar_modulated();
    let mod_bc = BoundaryCondition::periodic(&modulated);
    let wide = BvpOptions { s_range: (-3.0, 3.0), samples: 60, ..bvp };
    let runs = [
        ("planar Dirichlet", desuspension_check(&planar, move |_| dirichlet.clone(), &bvp, opts)),
        ("modulated periodic", desuspension_check(&modulated, move |_| mod_bc.clone(), &wide, opts)),
    ];
    for (name, r) in runs {
        match r {
            Ok(r) => {
                pass &= r.agree;
                parts.push(format!("{name} sf {} -Mas {}", r.sf, r.neg_mas));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn splitting(opts: &MaslovOptions) -> Outcome {
    let bvp = BvpOptions::default();
    let wide = BvpOptions { s_range: (-3.0, 3.0), samples: 60, ..bvp };
    let cases = [
        ("scalar", HamiltonianFamily::scalar_shift(), 0.5, bvp, Some(1)),
        ("two copies", HamiltonianFamily::diagonal_shift(2), 0.5, bvp, Some(2)),
        ("modulated", HamiltonianFamily::planar_modulated(), 0.3, wide, None),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, fam, cut, o, expected) in cases {
        match splitting_check(&fam, cut, &o, opts) {
            Ok(r) => {
                pass &= r.agree && expected.is_none_or(|e| e == r.sf_whole);
                parts.push(format!("{name} sf {} -Mas {}", r.sf_whole, r.neg_mas_cut));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn main() -> ExitCode {
    let opts = MaslovOptions::default();
    type Check = Box<dyn Fn(&MaslovOptions) -> Outcome>;
    let criteria: Vec<(&str, f64, Check)> = vec![
        ("1 benchmark Maslov value", 1.0, Box::new(benchmark)),
        ("2 winding vs crossing on 50 paths", 30.0, Box::new(|o| batteries(&[("method_agreement", 50)], o))),
        (
            "3 properties battery",
            60.0,
            Box::new(|o| {
                batteries(&[("flipping", 100), ("catenation", 100), ("direct_sum", 100), ("naturality", 100), ("vanishing", 100)], o)
            }),
        ),
        ("4 reduction invariance", 60.0, Box::new(|o| batteries(&[("reduction", 20)], o))),
        ("5 diagonal identities", 30.0, Box::new(|o| batteries(&[("diagonal", 50)], o))),
        ("6 SF = Mas bridge", 60.0, Box::new(|o| batteries(&[("sf_bridge", 100)], o))),
        ("7 desuspension formula", 60.0, Box::new(desuspension)),
        ("8 splitting formula", 30.0, Box::new(splitting)),
        ("9 Hormander path independence", 30.0, Box::new(|o| batteries(&[("hormander", 20)], o))),
        ("10 gap estimate", 10.0, Box::new(|o| batteries(&[("gap_estimate", 200)], o))),
        ("11 Cayley spectral mapping", 10.0, Box::new(|o| batteries(&[("cayley", 100)], o))),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let out = check(&opts);
        let secs = start.elapsed().as_secs_f64();
        let ok = out.pass && secs < limit;
        if !ok {
            failed += 1;
        }
        println!("{} {name} [{secs:.2}s / {limit}s] {}", if ok { "PASS" } else { "FAIL" }, out.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
