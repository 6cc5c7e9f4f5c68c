use std::path::PathBuf;

use locdec::turing::{fixtures, run, RunOutcome, TuringMachine};

fn machine_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/machines")
}

#[test]
fn json_fixtures_match_built_in_machines() {
    for (file, m) in [
        ("halt0.json", fixtures::halt0()),
        ("halt1.json", fixtures::halt1()),
        ("loop.json", fixtures::looping()),
        ("walk1.json", fixtures::walker()),
        ("bb2.json", fixtures::busy_beaver2()),
        ("count2.json", fixtures::counter(2, 1)),
        ("count16.json", fixtures::counter(16, 1)),
    ] {
        let loaded = TuringMachine::load(machine_dir().join(file)).unwrap();
        assert_eq!(loaded, m, "{file}");
        assert_eq!(loaded.name(), m.name());
    }
}

#[test]
fn fixture_outcomes() {
    let halted = |m: &TuringMachine| match run(m, 1000).unwrap() {
        RunOutcome::Halted { output, steps } => Some((output, steps)),
        RunOutcome::Running { .. } => None,
    };
    assert_eq!(halted(&fixtures::halt0()), Some((0, 1)));
    assert_eq!(halted(&fixtures::halt1()), Some((1, 1)));
    assert_eq!(halted(&fixtures::counter(2, 1)), Some((1, 2)));
    assert_eq!(halted(&fixtures::counter(16, 1)), Some((1, 16)));
    assert_eq!(halted(&fixtures::looping()), None);
}
