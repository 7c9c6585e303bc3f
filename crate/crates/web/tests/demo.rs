use orthobox_web::{gap_json, pr_box_json, Lab};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn fair_gap() {
    let v = parse(&gap_json("1/2", "1/2", "1/2").unwrap());
    assert_eq!(v["gap"]["exact"], "1/2");
    assert_eq!(v["clamped"], true);
    assert!(gap_json("2/3", "2/3", "0").is_err());
    assert!(gap_json("x", "1/2", "1/2").is_err());
}

#[test]
fn every_interpretation_is_a_pr_box() {
    for bits in 0..16 {
        let v = parse(&pr_box_json("seer", bits).unwrap());
        assert_eq!(v["chsh"], "4/1");
        assert_eq!(v["no_signalling"], true);
        assert_eq!(v["correlators"].as_array().unwrap().len(), 4);
    }
    assert!(pr_box_json("seer", 16).is_err());
}

#[test]
fn lab_sessions_are_seeded() {
    let run = |seed| {
        let mut lab = Lab::open("seer", seed).unwrap();
        lab.step("alice", "AB").unwrap();
        lab.step("bob", "BC").unwrap();
        lab.history()
    };
    assert_eq!(run(4), run(4));
    let mut lab = Lab::open("firefly", 0).unwrap();
    assert!(lab.step("alice", "A").is_err());
    assert!(lab.step("carol", "AB").is_err());
}

#[test]
fn lab_gets_stuck_on_contradiction() {
    // Alice A, Bob B, then both C: half the seer's runs contradict themselves.
    let stuck = (0..64).any(|seed| {
        let mut lab = Lab::open("seer", seed).unwrap();
        let steps = [("alice", "A"), ("bob", "B"), ("alice", "C"), ("bob", "C")];
        let failed = steps.iter().any(|(s, t)| lab.step(s, t).is_err());
        failed && lab.stuck() && lab.step("alice", "A").is_err()
    });
    assert!(stuck);
}
