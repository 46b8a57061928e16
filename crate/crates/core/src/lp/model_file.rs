//! Text serialization of learned models.
//!
//! Models are stored as TOML. Floats are written in shortest round-trip
//! form, so a saved model reloads bit for bit. Templates are stored as a
//! recipe (kind, degree, horizon) and rebuilt on load; frozen templates
//! nest the recipe of their inner template together with its fixed
//! coefficients.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LearnedModel, Provenance};
use crate::template::{
    custom_template, freeze, poly_input_time_template, poly_time_template, Basis, CustomBasis,
    ModelTemplate,
};

const FORMAT: &str = "pacmc-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TemplateRecord {
    PolyTime {
        degree: u32,
        horizon: f64,
    },
    PolyInputTime {
        inputs: usize,
        degree: u32,
        horizon: f64,
    },
    Custom {
        inputs: usize,
        horizon: f64,
        basis: Vec<String>,
    },
    Frozen {
        coefficients: Vec<f64>,
        inner: Box<TemplateRecord>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelRecord {
    format: String,
    description: String,
    xi: f64,
    coefficients: Vec<f64>,
    template: TemplateRecord,
    provenance: Provenance,
}

fn record_of(template: &ModelTemplate) -> TemplateRecord {
    match template.basis() {
        Basis::Polynomial(monomials) => {
            let degree = monomials.iter().map(|m| m.degree()).max().unwrap_or(0);
            if template.input_dimension() == 0 {
                TemplateRecord::PolyTime {
                    degree,
                    horizon: template.time_scale(),
                }
            } else {
                TemplateRecord::PolyInputTime {
                    inputs: template.input_dimension(),
                    degree,
                    horizon: template.time_scale(),
                }
            }
        }
        Basis::Frozen {
            inner,
            coefficients,
        } => TemplateRecord::Frozen {
            coefficients: coefficients.clone(),
            inner: Box::new(record_of(inner)),
        },
        Basis::Custom(functions) => TemplateRecord::Custom {
            inputs: template.input_dimension(),
            horizon: template.time_scale(),
            basis: functions.iter().map(|f| f.name.clone()).collect(),
        },
    }
}

fn rebuild(
    record: &TemplateRecord,
    resolve: &dyn Fn(&str) -> Option<CustomBasis>,
) -> Result<ModelTemplate> {
    match record {
        TemplateRecord::PolyTime { degree, horizon } => poly_time_template(*degree, *horizon),
        TemplateRecord::PolyInputTime {
            inputs,
            degree,
            horizon,
        } => poly_input_time_template(*inputs, *degree, *horizon),
        TemplateRecord::Custom {
            inputs,
            horizon,
            basis,
        } => {
            let functions = basis
                .iter()
                .map(|name| {
                    resolve(name).ok_or_else(|| {
                        Error::Config(format!("custom basis function `{name}` is not registered"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            custom_template(functions, *inputs, *horizon)
        }
        TemplateRecord::Frozen {
            coefficients,
            inner,
        } => freeze(&rebuild(inner, resolve)?, coefficients),
    }
}

/// Renders `model` as TOML text.
pub fn model_to_string(model: &LearnedModel) -> Result<String> {
    let record = ModelRecord {
        format: FORMAT.to_string(),
        description: model.template.description().to_string(),
        xi: model.xi,
        coefficients: model.coefficients.clone(),
        template: record_of(&model.template),
        provenance: model.provenance.clone(),
    };
    let body = toml::to_string(&record)
        .map_err(|e| Error::Config(format!("cannot serialize model: {e}")))?;
    Ok(format!(
        "# learned model: z(x0, t) = sum_l c_l phi_l(x0, t), tube half-width xi\n{body}"
    ))
}

/// Parses a model whose template is polynomial or frozen-polynomial.
pub fn model_from_str(text: &str) -> Result<LearnedModel> {
    model_from_str_with(text, &|_| None)
}

/// Parses a model, looking custom basis functions up by name.
pub fn model_from_str_with(
    text: &str,
    resolve: &dyn Fn(&str) -> Option<CustomBasis>,
) -> Result<LearnedModel> {
    let record: ModelRecord =
        toml::from_str(text).map_err(|e| Error::Config(format!("malformed model file: {e}")))?;
    if record.format != FORMAT {
        return Err(Error::Config(format!(
            "unsupported model format `{}` (expected `{FORMAT}`)",
            record.format
        )));
    }
    let template = rebuild(&record.template, resolve)?;
    template.check_coefficients(&record.coefficients)?;
    if !(record.xi >= 0.0) || !record.xi.is_finite() {
        return Err(Error::Config(format!(
            "model tube width must be finite and >= 0, got {}",
            record.xi
        )));
    }
    Ok(LearnedModel {
        template,
        coefficients: record.coefficients,
        xi: record.xi,
        provenance: record.provenance,
    })
}

pub fn save_model(model: &LearnedModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<LearnedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::PilotSizes;
    use crate::pac::{Budget, PacBudget, TwoLevelBudget};

    fn provenance(budget: Option<Budget>) -> Provenance {
        Provenance {
            times: 3,
            inputs: 1,
            uc: 100.0,
            uxi: 100.0,
            seed: Some(7),
            budget,
            horizon: 10.0,
            input_set: None,
            pilot: None,
            iterations: 4,
            max_residual: 0.125,
            training_input: Some(vec![1.4, 2.3]),
            config_hash: Some("abc".into()),
        }
    }

    #[test]
    fn polynomial_model_round_trips_exactly() {
        let model = LearnedModel {
            template: poly_time_template(2, 10.0).unwrap(),
            coefficients: vec![0.1, -1.0 / 3.0, std::f64::consts::PI * 1e-7],
            xi: 0.329_999_999_999_999_96,
            provenance: provenance(Some(Budget::Single(
                PacBudget::new(0.01, 1e-20, 4).unwrap(),
            ))),
        };
        let text = model_to_string(&model).unwrap();
        let back = model_from_str(&text).unwrap();
        assert_eq!(back.coefficients, model.coefficients);
        assert_eq!(back.xi.to_bits(), model.xi.to_bits());
        assert_eq!(back.provenance, model.provenance);
        assert_eq!(back.template.description(), model.template.description());
    }

    #[test]
    fn frozen_model_round_trips() {
        let inner = poly_input_time_template(2, 2, 10.0).unwrap();
        let c: Vec<f64> = (0..inner.len()).map(|i| i as f64 * 0.25 - 1.0).collect();
        let mut prov = provenance(Some(Budget::TwoLevel(
            TwoLevelBudget::new(0.1, 1e-10, 0.1, 1e-10, 1).unwrap(),
        )));
        prov.pilot = Some(PilotSizes {
            times: 50,
            inputs: 50,
        });
        prov.training_input = None;
        let model = LearnedModel {
            template: freeze(&inner, &c).unwrap(),
            coefficients: vec![1.0],
            xi: 1.5,
            provenance: prov,
        };
        let back = model_from_str(&model_to_string(&model).unwrap()).unwrap();
        assert!(back.template.is_frozen());
        assert_eq!(back.provenance, model.provenance);
        for (x, t) in [([0.1, -0.2], 0.0), ([1.0, 2.0], 7.5)] {
            assert_eq!(
                back.evaluate(&x, t).unwrap(),
                model.evaluate(&x, t).unwrap()
            );
        }
    }

    #[test]
    fn custom_model_needs_a_resolver() {
        let f = CustomBasis::new("sin", |_x: &[f64], t: f64| t.sin());
        let model = LearnedModel {
            template: custom_template(vec![f.clone()], 0, 1.0).unwrap(),
            coefficients: vec![2.0],
            xi: 0.0,
            provenance: provenance(None),
        };
        let text = model_to_string(&model).unwrap();
        assert!(matches!(model_from_str(&text), Err(Error::Config(_))));
        let back = model_from_str_with(&text, &|name| (name == "sin").then(|| f.clone())).unwrap();
        assert_eq!(back.evaluate(&[], 0.5).unwrap(), 2.0 * 0.5f64.sin());
    }

    #[test]
    fn rejects_wrong_format_and_coefficient_count() {
        let model = LearnedModel {
            template: poly_time_template(1, 1.0).unwrap(),
            coefficients: vec![1.0, 2.0],
            xi: 0.5,
            provenance: provenance(None),
        };
        let text = model_to_string(&model).unwrap();
        assert!(model_from_str(&text.replace(FORMAT, "other/9")).is_err());
        assert!(
            model_from_str(&text.replace("coefficients = [1.0, 2.0]", "coefficients = [1.0]"))
                .is_err()
        );
    }
}
