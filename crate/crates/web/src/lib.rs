//! Three browser operations over the core library: the signalling gap for
//! chosen marginals, a PR box read off a model under one of 16
//! interpretations, and a step-by-step lab session on a model.
//!
//! Results cross into JavaScript as JSON strings. The `*_json` functions do
//! the work and are what the native tests call; the exported wrappers only
//! turn errors into JS exceptions.

use orthobox::behavior::{chsh, correlation_pattern, no_signalling_check};
use orthobox::models::{render_history, AnyModel, Model, ModelError, Query, Session, Side, Target};
use orthobox::protocols::{realize_pr_box, Interpretation};
use orthobox::rational::{format_rational, parse_rational, to_decimal};
use orthobox::theorem::{gap_row, TripleMarginals};
use orthobox::Rational;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn number(r: &Rational) -> Value {
    json!({ "exact": format_rational(r), "decimal": to_decimal(r) })
}

pub fn gap_json(p1: &str, p2: &str, p3: &str) -> Result<String, String> {
    let parse = |s: &str| parse_rational(s.trim()).map_err(|e| format!("{s:?}: {e}"));
    let t = TripleMarginals::new(parse(p1)?, parse(p2)?, parse(p3)?).map_err(|e| e.to_string())?;
    let row = gap_row(t);
    Ok(json!({
        "beta": number(&row.beta_worst),
        "alpha": number(&row.alpha_worst),
        "clamped": row.beta_worst == Rational::from_integer(1),
        "bob_p1": number(&row.bob_p1),
        "gap": number(&row.gap),
    })
    .to_string())
}

pub fn pr_box_json(model: &str, bits: u8) -> Result<String, String> {
    if bits >= 16 {
        return Err("interpretation index runs from 0 to 15".into());
    }
    let m = AnyModel::from_name(model, None).map_err(|e| e.to_string())?;
    let interp = Interpretation::all_from(Interpretation::standard())[bits as usize];
    let table = realize_pr_box(&m, &interp).map_err(|e| e.to_string())?;
    let correlators = table.correlators().map_err(|e| e.to_string())?;
    let s = chsh(&table).map_err(|e| e.to_string())?;
    Ok(json!({
        "interpretation": interp.to_string(),
        "correlators": correlators
            .iter()
            .map(|(a, b, e)| json!({ "a": a, "b": b, "e": format_rational(e) }))
            .collect::<Vec<_>>(),
        "chsh": format_rational(&s.value),
        "pattern": correlation_pattern(&table),
        "no_signalling": no_signalling_check(&table).holds,
    })
    .to_string())
}

/// One run of queries on a model, sampled with a fixed seed.
#[wasm_bindgen]
pub struct Lab {
    session: Session<AnyModel>,
    stuck: bool,
}

#[wasm_bindgen]
impl Lab {
    #[wasm_bindgen(constructor)]
    pub fn new(model: &str, seed: u32) -> Result<Lab, JsError> {
        Lab::open(model, seed).map_err(|e| JsError::new(&e))
    }

    /// Rendered outcome, e.g. `full/empty`.
    pub fn measure(&mut self, side: &str, target: &str) -> Result<String, JsError> {
        self.step(side, target).map_err(|e| JsError::new(&e))
    }

    pub fn history(&self) -> String {
        render_history(self.session.history(), self.session.model().vocabulary())
    }

    pub fn stuck(&self) -> bool {
        self.stuck
    }
}

impl Lab {
    pub fn open(model: &str, seed: u32) -> Result<Lab, String> {
        let m = AnyModel::from_name(model, None).map_err(|e| e.to_string())?;
        Ok(Lab {
            session: Session::new(m, u64::from(seed)),
            stuck: false,
        })
    }

    pub fn step(&mut self, side: &str, target: &str) -> Result<String, String> {
        if self.stuck {
            return Err("this history is already inconsistent; start again".into());
        }
        let side_name = side;
        let side = match side {
            "alice" => Side::Alice,
            "bob" => Side::Bob,
            other => return Err(format!("unknown side {other:?}")),
        };
        let target: Target = target.parse().map_err(|e: <Target as std::str::FromStr>::Err| e.to_string())?;
        let q = Query::new(side, target);
        match self.session.measure(q) {
            Ok(outcome) => Ok(outcome.render(target, self.session.model().vocabulary())),
            Err(ModelError::InconsistentHistory(_)) => {
                self.stuck = true;
                Err(format!("{side_name} {target}: no consistent outcome remains"))
            }
            Err(e) => Err(e.to_string()),
        }
    }
}

#[wasm_bindgen]
pub fn gap(p1: &str, p2: &str, p3: &str) -> Result<String, JsError> {
    gap_json(p1, p2, p3).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pr_box(model: &str, bits: u8) -> Result<String, JsError> {
    pr_box_json(model, bits).map_err(|e| JsError::new(&e))
}

/// Boxes a model lets one query open, for greying out buttons.
#[wasm_bindgen]
pub fn admissible(model: &str, side: &str) -> Result<String, JsError> {
    let m = AnyModel::from_name(model, None).map_err(|e| JsError::new(&e.to_string()))?;
    let side = if side == "bob" { Side::Bob } else { Side::Alice };
    let names: Vec<String> = Target::ALL
        .iter()
        .filter(|&&t| m.admits(Query::new(side, t)))
        .map(|t| t.to_string())
        .collect();
    Ok(json!(names).to_string())
}
