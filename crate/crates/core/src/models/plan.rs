//! Query plans, possibly adaptive.
//!
//! ```text
//! # comment
//! alice C
//!   full -> alice B
//!   empty -> alice A
//! bob AB
//! ```
//!
//! A step is `side target` with side `alice` or `bob` and target one of
//! `A B C AB BC CA`. Lines indented under a step are its arms:
//! `outcome -> [step]`, where the outcome is `full`/`empty` (or
//! `glow`/`dark`) for a single box, two such words joined by `/` for a pair
//! in reading order, or `*` for anything. The first matching arm runs, then
//! the plan resumes after the step. Lines indented under an arm continue its
//! sub-plan. Indentation is by spaces.

use std::fmt;

use thiserror::Error;

use super::{Outcome, Query, Side, Target};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Plan {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub query: Query,
    pub arms: Vec<Arm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arm {
    pub pattern: OutcomePattern,
    pub then: Plan,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutcomePattern {
    Any,
    /// Values in the target's reading order; `true` is full.
    Exactly(Vec<bool>),
}

impl OutcomePattern {
    pub fn matches(&self, target: Target, outcome: &Outcome) -> bool {
        match self {
            OutcomePattern::Any => true,
            OutcomePattern::Exactly(v) => outcome.values(target).as_deref() == Some(v.as_slice()),
        }
    }
}

impl fmt::Display for OutcomePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomePattern::Any => f.write_str("*"),
            OutcomePattern::Exactly(v) => {
                let words: Vec<&str> = v.iter().map(|&b| if b { "full" } else { "empty" }).collect();
                f.write_str(&words.join("/"))
            }
        }
    }
}

impl Plan {
    pub fn new(steps: Vec<Step>) -> Self {
        Plan { steps }
    }

    /// Non-adaptive plan from a list of queries.
    pub fn sequence(queries: impl IntoIterator<Item = Query>) -> Self {
        Plan::new(queries.into_iter().map(Step::new).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Longest run of queries any branch can make.
    pub fn depth(&self) -> usize {
        fn go(steps: &[Step]) -> usize {
            let Some((first, rest)) = steps.split_first() else {
                return 0;
            };
            let arm = first.arms.iter().map(|a| go(&a.then.steps)).max().unwrap_or(0);
            1 + arm + go(rest)
        }
        go(&self.steps)
    }

    /// Every query the plan can issue.
    pub fn queries(&self) -> Vec<Query> {
        let mut out = Vec::new();
        for s in &self.steps {
            out.push(s.query);
            for a in &s.arms {
                out.extend(a.then.queries());
            }
        }
        out
    }

    /// Text in the plan-file grammar; parses back to an equal plan.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_block(&self.steps, 0, &mut out);
        out
    }
}

fn write_block(steps: &[Step], indent: usize, out: &mut String) {
    for s in steps {
        out.push_str(&" ".repeat(indent));
        out.push_str(&s.query.to_string());
        out.push('\n');
        for a in &s.arms {
            out.push_str(&" ".repeat(indent + 2));
            out.push_str(&format!("{} ->\n", a.pattern));
            write_block(&a.then.steps, indent + 4, out);
        }
    }
}

impl Step {
    pub fn new(query: Query) -> Self {
        Step {
            query,
            arms: Vec::new(),
        }
    }

    pub fn with_arm(mut self, pattern: OutcomePattern, then: Plan) -> Self {
        self.arms.push(Arm { pattern, then });
        self
    }

    pub fn arm_for(&self, outcome: &Outcome) -> Option<&Arm> {
        self.arms
            .iter()
            .find(|a| a.pattern.matches(self.query.target, outcome))
    }
}

/// One-line rendering: `alice C { full: alice B; empty: alice A }; bob AB`.
impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("(nothing)");
        }
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}", s.query)?;
            if !s.arms.is_empty() {
                f.write_str(" { ")?;
                for (k, a) in s.arms.iter().enumerate() {
                    if k > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}: {}", a.pattern, a.then)?;
                }
                f.write_str(" }")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct PlanError {
    pub line: usize,
    pub message: String,
}

struct Line<'a> {
    number: usize,
    indent: usize,
    text: &'a str,
}

impl Line<'_> {
    fn is_arm(&self) -> bool {
        self.text.contains("->")
    }
}

pub fn parse_plan(text: &str) -> Result<Plan, PlanError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        if body.starts_with('\t') {
            return Err(PlanError {
                line: i + 1,
                message: "indent with spaces, not tabs".into(),
            });
        }
        lines.push(Line {
            number: i + 1,
            indent: body.len() - body.trim_start().len(),
            text: body.trim(),
        });
    }
    let mut pos = 0;
    let steps = match lines.first() {
        Some(first) => parse_block(&lines, &mut pos, first.indent)?,
        None => Vec::new(),
    };
    if let Some(l) = lines.get(pos) {
        return Err(PlanError {
            line: l.number,
            message: "indentation does not match any open block".into(),
        });
    }
    Ok(Plan::new(steps))
}

fn parse_block(lines: &[Line], pos: &mut usize, indent: usize) -> Result<Vec<Step>, PlanError> {
    let mut steps = Vec::new();
    while let Some(l) = lines.get(*pos) {
        if l.indent < indent {
            break;
        }
        if l.indent > indent {
            return Err(PlanError {
                line: l.number,
                message: "unexpected indentation".into(),
            });
        }
        if l.is_arm() {
            return Err(PlanError {
                line: l.number,
                message: "outcome arm must be indented under a step".into(),
            });
        }
        let mut step = Step::new(parse_query(l.text, l.number)?);
        *pos += 1;
        parse_arms(lines, pos, &mut step, indent)?;
        steps.push(step);
    }
    Ok(steps)
}

fn parse_arms(lines: &[Line], pos: &mut usize, step: &mut Step, owner: usize) -> Result<(), PlanError> {
    let mut arm_indent = None;
    while let Some(l) = lines.get(*pos) {
        if l.indent <= owner || !l.is_arm() {
            break;
        }
        match arm_indent {
            None => arm_indent = Some(l.indent),
            Some(a) if a != l.indent => {
                return Err(PlanError {
                    line: l.number,
                    message: "arms of one step must share an indentation".into(),
                })
            }
            Some(_) => {}
        }
        let (pattern_text, inline) = l.text.split_once("->").expect("arm line");
        let pattern = parse_pattern(pattern_text.trim(), step.query.target, l.number)?;
        *pos += 1;
        let mut sub = Vec::new();
        if !inline.trim().is_empty() {
            let mut first = Step::new(parse_query(inline.trim(), l.number)?);
            parse_arms(lines, pos, &mut first, l.indent)?;
            sub.push(first);
        }
        if let Some(next) = lines.get(*pos) {
            if next.indent > l.indent {
                sub.extend(parse_block(lines, pos, next.indent)?);
            }
        }
        step.arms.push(Arm {
            pattern,
            then: Plan::new(sub),
        });
    }
    Ok(())
}

fn parse_query(text: &str, line: usize) -> Result<Query, PlanError> {
    let err = |message: String| PlanError { line, message };
    let mut words = text.split_whitespace();
    let side = match words.next() {
        Some("alice") => Side::Alice,
        Some("bob") => Side::Bob,
        Some(other) => return Err(err(format!("unknown side {other:?} (expected alice or bob)"))),
        None => return Err(err("missing step".into())),
    };
    let target: Target = words
        .next()
        .ok_or_else(|| err("missing target".into()))?
        .parse()
        .map_err(err)?;
    if let Some(extra) = words.next() {
        return Err(err(format!("unexpected {extra:?} after target")));
    }
    Ok(Query::new(side, target))
}

fn parse_pattern(text: &str, target: Target, line: usize) -> Result<OutcomePattern, PlanError> {
    if text == "*" {
        return Ok(OutcomePattern::Any);
    }
    let values = text
        .split('/')
        .map(|w| match w.trim() {
            "full" | "glow" => Ok(true),
            "empty" | "dark" => Ok(false),
            other => Err(PlanError {
                line,
                message: format!("unknown outcome {other:?} (expected full, empty, glow, dark or *)"),
            }),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    let want = target.boxes().len();
    if values.len() != want {
        return Err(PlanError {
            line,
            message: format!("target {target} needs {want} outcome word(s), got {}", values.len()),
        });
    }
    Ok(OutcomePattern::Exactly(values))
}

/// Plans shipped with the crate: `(name, source)`.
pub const BUNDLED_PLANS: [(&str, &str); 3] = [
    ("fable", include_str!("../../data/plans/fable.plan")),
    ("lsw_sequence", include_str!("../../data/plans/lsw_sequence.plan")),
    ("firefly_ca_bc", include_str!("../../data/plans/firefly_ca_bc.plan")),
];

pub fn bundled_plan(name: &str) -> Option<Plan> {
    BUNDLED_PLANS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_plan(src).expect("bundled plans parse"))
}
