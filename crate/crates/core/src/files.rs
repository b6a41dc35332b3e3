//! JSON file schemas: field literals, form files, certificate files, and
//! solve reports. Integers that fit in `i64` are written as JSON numbers;
//! larger values round-trip as decimal strings.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::form::{AdditiveForm, FormError, ZeroCertificate};
use crate::ring::{Field, RingElement, RingError, Valuation};
use crate::solver::{ContractionStep, SolveReport, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FileError {
    #[error("malformed integer literal {0:?}")]
    BadInteger(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// An integer that may exceed the range of JSON numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntLit {
    Small(i64),
    Big(String),
}

impl IntLit {
    pub fn to_bigint(&self) -> Result<BigInt, FileError> {
        match self {
            IntLit::Small(x) => Ok(BigInt::from(*x)),
            IntLit::Big(s) => {
                BigInt::from_str(s.trim()).map_err(|_| FileError::BadInteger(s.clone()))
            }
        }
    }

    pub fn from_bigint(x: &BigInt) -> IntLit {
        match i64::try_from(x.clone()) {
            Ok(v) => IntLit::Small(v),
            Err(_) => IntLit::Big(x.to_string()),
        }
    }
}

/// Element literal: a bare integer (constant term) or the list
/// `[a_0, ..., a_{e-1}]` meaning `sum a_j pi^j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementLit {
    Scalar(IntLit),
    Vector(Vec<IntLit>),
}

impl ElementLit {
    pub fn to_element(&self, field: &Field) -> Result<RingElement, FileError> {
        let lits: Vec<BigInt> = match self {
            ElementLit::Scalar(x) => {
                let mut v = vec![BigInt::from(0); field.e()];
                v[0] = x.to_bigint()?;
                v
            }
            ElementLit::Vector(xs) => {
                let mut v: Vec<BigInt> =
                    xs.iter().map(|x| x.to_bigint()).collect::<Result<_, _>>()?;
                v.resize(field.e(), BigInt::from(0));
                v
            }
        };
        Ok(field.element(&lits)?)
    }

    pub fn from_element(el: &RingElement) -> ElementLit {
        ElementLit::Vector(el.to_literals().iter().map(IntLit::from_bigint).collect())
    }
}

/// `{"e": E, "eisenstein": [c_0, ..., c_{e-1}], "precision": N}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldLiteral {
    pub e: usize,
    pub eisenstein: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

impl FieldLiteral {
    pub fn to_field(&self) -> Result<Field, FileError> {
        let n_pi = self
            .precision
            .unwrap_or_else(|| Field::default_precision(self.e));
        Ok(Field::from_i64(self.e, &self.eisenstein, n_pi)?)
    }

    pub fn describe(field: &Field) -> FieldLiteral {
        FieldLiteral {
            e: field.e(),
            eisenstein: field
                .eisenstein()
                .iter()
                .map(|c| i64::try_from(c.clone()).unwrap_or(0))
                .collect(),
            precision: Some(field.n_pi()),
        }
    }
}

/// `{"field": {...}, "d": D, "coefficients": [[...], ...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormFile {
    pub field: FieldLiteral,
    pub d: u32,
    pub coefficients: Vec<ElementLit>,
}

impl FormFile {
    pub fn to_form(&self) -> Result<(Field, AdditiveForm), FileError> {
        let field = self.field.to_field()?;
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| c.to_element(&field))
            .collect::<Result<Vec<_>, _>>()?;
        let form = AdditiveForm::new(&field, self.d, coeffs)?;
        Ok((field, form))
    }

    pub fn from_form(form: &AdditiveForm) -> FormFile {
        FormFile {
            field: FieldLiteral::describe(form.field()),
            d: form.d(),
            coefficients: form.coeffs().iter().map(ElementLit::from_element).collect(),
        }
    }
}

/// Valuation in a report: a number, or the marker string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValuationLit {
    Finite(u32),
    Marker(String),
}

impl ValuationLit {
    pub fn from_valuation(v: Valuation) -> ValuationLit {
        match v {
            Valuation::Finite(x) => ValuationLit::Finite(x),
            Valuation::AtLeastPrecision => ValuationLit::Marker("at_least_precision".to_string()),
        }
    }
}

/// `{"assignment": [...], "n_target": N, "pivot": I, "valuation_achieved": V}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub assignment: Vec<ElementLit>,
    pub n_target: u32,
    pub pivot: usize,
    pub valuation_achieved: ValuationLit,
}

impl CertificateFile {
    pub fn to_certificate(&self, field: &Field) -> Result<ZeroCertificate, FileError> {
        let assignment = self
            .assignment
            .iter()
            .map(|b| b.to_element(field))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ZeroCertificate {
            assignment,
            n_target: self.n_target,
            pivot: self.pivot,
        })
    }

    pub fn from_certificate(cert: &ZeroCertificate, achieved: Valuation) -> CertificateFile {
        CertificateFile {
            assignment: cert
                .assignment
                .iter()
                .map(ElementLit::from_element)
                .collect(),
            n_target: cert.n_target,
            pivot: cert.pivot,
            valuation_achieved: ValuationLit::from_valuation(achieved),
        }
    }
}

/// Solve report file. Wall time is deliberately omitted so identical
/// invocations with identical seeds write byte-identical reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReportFile {
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub field: FieldLiteral,
    pub d: u32,
    pub s: usize,
    pub n_target: u32,
    pub rotation: u32,
    pub dispatched: String,
    pub strategy: String,
    pub outcome: String,
    pub above_bound_unsolved: bool,
    pub hensel_iterations: usize,
    pub fallback_nodes: u64,
    pub contraction_log: Vec<ContractionStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateFile>,
}

impl SolveReportFile {
    pub fn build(form: &AdditiveForm, report: &SolveReport, seed: Option<u64>) -> SolveReportFile {
        let certificate = report.certificate.as_ref().map(|cert| {
            let achieved = form.verify_certificate(cert).valuation;
            CertificateFile::from_certificate(cert, achieved)
        });
        SolveReportFile {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            field: FieldLiteral::describe(form.field()),
            d: form.d(),
            s: form.len(),
            n_target: report.n_target,
            rotation: report.rotation,
            dispatched: report.dispatched.label(),
            strategy: report.executed.label(),
            outcome: if report.certificate.is_some() {
                "certificate".to_string()
            } else {
                "unsolved".to_string()
            },
            above_bound_unsolved: report.above_bound_unsolved,
            hensel_iterations: report.hensel_iterations,
            fallback_nodes: report.fallback_nodes,
            contraction_log: report.log.clone(),
            certificate,
        }
    }
}

/// Strategy labels appear in reports; keep the mapping in one place.
pub fn strategy_label(s: Strategy) -> String {
    s.label()
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
