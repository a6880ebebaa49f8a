use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QuantumNumbers;
use crate::error::Result;
use crate::numerics::pairwise_sum;

/// Finite complex-coefficient expansion over unperturbed bound states.
///
/// Terms are kept in (n, l, m) order so that every downstream sum runs in the
/// same sequence regardless of how the state was assembled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Superposition {
    terms: BTreeMap<QuantumNumbers, Complex64>,
}

/// JSON form: list of {n, l, m, re, im} plus free-form metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperpositionRecord {
    pub terms: Vec<TermRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<StateMetadata>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TermRecord {
    pub n: i32,
    pub l: i32,
    pub m: i32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMetadata {
    #[serde(rename = "E")]
    pub field: f64,
    pub theta: f64,
    pub n_max: u32,
}

impl Superposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(qn: QuantumNumbers) -> Self {
        let mut s = Self::new();
        s.set(qn, Complex64::new(1.0, 0.0));
        s
    }

    pub fn set(&mut self, qn: QuantumNumbers, c: Complex64) {
        self.terms.insert(qn, c);
    }

    /// Adds `c` to the coefficient of `qn`.
    pub fn add(&mut self, qn: QuantumNumbers, c: Complex64) {
        *self.terms.entry(qn).or_default() += c;
    }

    pub fn coefficient(&self, qn: &QuantumNumbers) -> Complex64 {
        self.terms.get(qn).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuantumNumbers, &Complex64)> {
        self.terms.iter()
    }

    pub fn states(&self) -> impl Iterator<Item = &QuantumNumbers> {
        self.terms.keys()
    }

    pub fn norm_sqr(&self) -> f64 {
        let parts: Vec<f64> = self.terms.values().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&parts)
    }

    /// ⟨self|other⟩ in the orthonormal basis.
    pub fn inner(&self, other: &Superposition) -> Complex64 {
        let parts: Vec<Complex64> = self
            .terms
            .iter()
            .filter_map(|(qn, a)| other.terms.get(qn).map(|b| a.conj() * b))
            .collect();
        crate::numerics::pairwise_sum_complex(&parts)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(q, c)| (*q, c * factor)).collect(),
        }
    }

    /// self + other, term by term.
    pub fn combined(&self, other: &Superposition) -> Self {
        let mut out = self.clone();
        for (q, c) in &other.terms {
            out.add(*q, *c);
        }
        out
    }

    /// Copy with every coefficient except the one on `keep` set to zero.
    pub fn zeroed_except(&self, keep: &QuantumNumbers) -> Self {
        Self {
            terms: self
                .terms
                .keys()
                .map(|q| {
                    (
                        *q,
                        if q == keep {
                            self.coefficient(q)
                        } else {
                            Complex64::default()
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn to_record(&self, metadata: Option<StateMetadata>) -> SuperpositionRecord {
        SuperpositionRecord {
            terms: self
                .terms
                .iter()
                .map(|(q, c)| TermRecord {
                    n: q.n(),
                    l: q.l(),
                    m: q.m(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
            metadata,
        }
    }

    pub fn from_record(record: &SuperpositionRecord) -> Result<Self> {
        let mut s = Self::new();
        for t in &record.terms {
            s.add(QuantumNumbers::new(t.n, t.l, t.m)?, Complex64::new(t.re, t.im));
        }
        Ok(s)
    }

    pub fn to_json(&self, metadata: Option<StateMetadata>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record(metadata))?)
    }

    pub fn from_json(text: &str) -> Result<(Self, Option<StateMetadata>)> {
        let record: SuperpositionRecord = serde_json::from_str(text)?;
        Ok((Self::from_record(&record)?, record.metadata))
    }
}

impl FromIterator<(QuantumNumbers, Complex64)> for Superposition {
    fn from_iter<I: IntoIterator<Item = (QuantumNumbers, Complex64)>>(iter: I) -> Self {
        let mut s = Self::new();
        for (q, c) in iter {
            s.add(q, c);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qn(n: i32, l: i32, m: i32) -> QuantumNumbers {
        QuantumNumbers::new(n, l, m).unwrap()
    }

    #[test]
    fn no_duplicate_keys() {
        let mut s = Superposition::basis(qn(2, 1, 1));
        s.add(qn(2, 1, 1), Complex64::new(0.5, 0.0));
        s.add(qn(3, 0, 0), Complex64::new(0.0, 1.0));
        assert_eq!(s.len(), 2);
        assert_eq!(s.coefficient(&qn(2, 1, 1)), Complex64::new(1.5, 0.0));
        assert!((s.norm_sqr() - 3.25).abs() < 1e-15);
    }

    #[test]
    fn json_rejects_invalid_states() {
        let bad = r#"{"terms":[{"n":1,"l":1,"m":0,"re":1.0,"im":0.0}]}"#;
        assert!(Superposition::from_json(bad).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(coeffs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..20)) {
            let states: Vec<QuantumNumbers> = (1..=4).flat_map(QuantumNumbers::shell).collect();
            let s: Superposition = coeffs
                .iter()
                .zip(states.iter())
                .map(|(&(re, im), q)| (*q, Complex64::new(re, im)))
                .collect();
            let meta = StateMetadata { field: 1e-8, theta: 0.3, n_max: 20 };
            let (back, m) = Superposition::from_json(&s.to_json(Some(meta)).unwrap()).unwrap();
            prop_assert_eq!(back, s);
            prop_assert_eq!(m, Some(meta));
        }
    }
}
