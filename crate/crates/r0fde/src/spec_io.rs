//! Model spec files: a JSON document either naming a generic (F, V) pair of
//! discrete-delay operators or a tick parameter set. Parsing reports the
//! offending field; canonical serialization sorts keys and uses shortest
//! round-trip float formatting, so serialize -> parse -> serialize is
//! byte-identical.

use serde::{Deserialize, Serialize};

use crate::delay_op::DelayLinearOperator;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::r0_engine::NextGenModel;
use crate::tick_model::TickParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(rename = "A0")]
    pub a0: Vec<Vec<f64>>,
    #[serde(default)]
    pub delayed: Vec<DelayedTermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayedTermSpec {
    pub tau: f64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Tick {
        tick: TickParams,
    },
    Linear {
        m: usize,
        #[serde(rename = "F")]
        f: OperatorSpec,
        #[serde(rename = "V")]
        v: OperatorSpec,
    },
}

fn check_matrix(name: &str, m: usize, rows: &[Vec<f64>]) -> Result<DenseMatrix> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::BadSpec(format!("{name}: expected an {m}x{m} matrix")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::BadSpec(format!("{name}: entries must be finite")));
    }
    Ok(DenseMatrix::from_rows(rows))
}

fn build_operator(name: &str, m: usize, spec: &OperatorSpec) -> Result<DelayLinearOperator> {
    let a0 = check_matrix(&format!("{name}.A0"), m, &spec.a0)?;
    let mut terms = Vec::with_capacity(spec.delayed.len());
    for (k, term) in spec.delayed.iter().enumerate() {
        if !(term.tau > 0.0) || !term.tau.is_finite() {
            return Err(Error::BadSpec(format!(
                "{name}.delayed[{k}].tau: must be a positive finite number, got {}",
                term.tau
            )));
        }
        let a = check_matrix(&format!("{name}.delayed[{k}].A"), m, &term.a)?;
        terms.push((term.tau, a));
    }
    Ok(DelayLinearOperator::new(a0, terms))
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| {
            Error::BadSpec(format!(
                "line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        spec.check()?;
        Ok(spec)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::BadSpec(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<()> {
        match self {
            ModelSpec::Tick { tick } => tick.validate(),
            ModelSpec::Linear { m, f, v } => {
                if *m == 0 {
                    return Err(Error::BadSpec("m: must be at least 1".into()));
                }
                build_operator("F", *m, f)?;
                build_operator("V", *m, v)?;
                Ok(())
            }
        }
    }

    /// The unvalidated (F, V) pair; tick specs go through the linearization.
    pub fn to_model(&self) -> Result<NextGenModel> {
        match self {
            ModelSpec::Tick { tick } => Ok(crate::tick_model::linearize(tick)),
            ModelSpec::Linear { m, f, v } => Ok(NextGenModel::unchecked(
                build_operator("F", *m, f)?,
                build_operator("V", *m, v)?,
            )),
        }
    }

    pub fn tick_params(&self) -> Option<&TickParams> {
        match self {
            ModelSpec::Tick { tick } => Some(tick),
            ModelSpec::Linear { .. } => None,
        }
    }

    /// Sorted keys, shortest round-trip floats, trailing newline.
    pub fn canonical_json(&self) -> String {
        // serde_json's default map is ordered, so a Value round trip sorts
        // the keys; ryu prints shortest-exact floats.
        let value = serde_json::to_value(self).expect("spec serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }
}
