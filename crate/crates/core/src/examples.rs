//! The bundled regression suite: each check recomputes one table entry and
//! compares it with a closed-form value.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::bulk_density::PhiTable;
use crate::connectivity::classify;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fixtures;
use crate::ground_state::SolveOptions;
use crate::model::LatticeModel;
use crate::rational::{self, Rational};
use crate::spin::Spin;
use crate::surface_tension::SurfaceTable;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Quantity {
    Phi { z: Vec<Spin>, m_list: Vec<i64> },
    Surface { phase: usize, normal: Vec<i64>, t_list: Vec<i64> },
}

#[derive(Clone, Debug, Deserialize)]
struct RawCheck {
    name: String,
    model: String,
    #[serde(flatten)]
    quantity: Quantity,
    expected: String,
    tolerance: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    checks: Vec<RawCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub model: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn run_check(check: &RawCheck, options: &SolveOptions) -> Result<CheckOutcome> {
    let text = fixtures::by_name(&check.model).ok_or_else(|| Error::MissingEntry(format!("fixture {}", check.model)))?;
    let model = LatticeModel::from_json(text)?;
    let summary = classify(&model);
    let computed: Rational = match &check.quantity {
        Quantity::Phi { z, m_list } => {
            let table = PhiTable::compute(&model, &summary, std::slice::from_ref(z), m_list, options)?;
            table.rows[0].upper.clone()
        }
        Quantity::Surface { phase, normal, t_list } => {
            let table = SurfaceTable::compute(&model, &summary, &[*phase], std::slice::from_ref(normal), t_list, options.execution)?;
            table.rows[0].estimate.clone()
        }
    };
    let expected = rational::parse(&check.expected)?;
    let tolerance = rational::parse(&check.tolerance)?;
    Ok(CheckOutcome {
        name: check.name.clone(),
        model: check.model.clone(),
        expected: rational::to_f64(&expected),
        computed: rational::to_f64(&computed),
        tolerance: rational::to_f64(&tolerance),
        pass: (&computed - &expected).abs() <= tolerance,
    })
}

/// Runs every bundled check. Checks run in parallel, each solved sequentially.
pub fn run_examples(execution: Execution) -> Result<Vec<CheckOutcome>> {
    let suite: RawSuite = serde_json::from_str(fixtures::EXPECTED)?;
    let inner = SolveOptions { execution: Execution::Sequential, ..SolveOptions::default() };
    execution.map(&suite.checks, |c| run_check(c, &inner)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_parses_and_names_real_fixtures() {
        let suite: RawSuite = serde_json::from_str(fixtures::EXPECTED).unwrap();
        assert!(suite.checks.len() >= fixtures::ALL_MODELS.len());
        for c in &suite.checks {
            assert!(fixtures::by_name(&c.model).is_some(), "{}", c.name);
        }
        for (name, _) in fixtures::ALL_MODELS {
            assert!(suite.checks.iter().any(|c| c.model == *name), "{name} has no check");
        }
    }
}
