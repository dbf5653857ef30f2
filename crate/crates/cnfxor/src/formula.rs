//! Data model for k-CNF-XOR formulas: a conjunction of fixed-width
//! disjunctive clauses and variable-width parity constraints over the same
//! variables, plus assignments and evaluation.

use crate::gf2::{BitVec, Gf2Row, Gf2System};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("assignment has {got} values but the formula has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// A possibly negated variable. Variables are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, negated }
    }

    /// Signed DIMACS form: negative means negated.
    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn from_dimacs(code: i64) -> Option<Self> {
        if code == 0 {
            return None;
        }
        Some(Literal {
            var: code.unsigned_abs() as u32,
            negated: code < 0,
        })
    }
}

/// Disjunction of exactly k literals over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KClause {
    pub literals: Vec<Literal>,
}

impl KClause {
    pub fn new(literals: Vec<Literal>) -> Self {
        KClause { literals }
    }

    pub fn satisfied_by(&self, values: &BitVec) -> bool {
        self.literals
            .iter()
            .any(|l| values.get(l.var as usize - 1) != l.negated)
    }
}

impl Serialize for KClause {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let codes: Vec<i64> = self.literals.iter().map(|l| l.to_dimacs()).collect();
        codes.serialize(s)
    }
}

impl<'de> Deserialize<'de> for KClause {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let codes = Vec::<i64>::deserialize(d)?;
        let literals = codes
            .iter()
            .map(|&c| Literal::from_dimacs(c).ok_or_else(|| D::Error::custom("literal 0")))
            .collect::<Result<_, _>>()?;
        Ok(KClause { literals })
    }
}

/// Parity constraint: XOR of `vars` equals `rhs`. The variable set may be
/// empty; `(∅, rhs=1)` is unsatisfiable and `(∅, rhs=0)` is a tautology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorClause {
    pub vars: Vec<u32>,
    #[serde(serialize_with = "rhs_as_int", deserialize_with = "rhs_from_int")]
    pub rhs: bool,
}

fn rhs_as_int<S: Serializer>(rhs: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(*rhs as u8)
}

fn rhs_from_int<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(D::Error::custom(format!("rhs must be 0 or 1, got {other}"))),
    }
}

impl XorClause {
    /// `vars` is normalized to a sorted set; repeats cancel pairwise.
    pub fn new(mut vars: Vec<u32>, rhs: bool) -> Self {
        vars.sort_unstable();
        let mut out = Vec::with_capacity(vars.len());
        let mut i = 0;
        while i < vars.len() {
            let mut count = 1;
            while i + count < vars.len() && vars[i + count] == vars[i] {
                count += 1;
            }
            if count % 2 == 1 {
                out.push(vars[i]);
            }
            i += count;
        }
        XorClause { vars: out, rhs }
    }

    pub fn satisfied_by(&self, values: &BitVec) -> bool {
        let parity = self
            .vars
            .iter()
            .fold(false, |acc, &v| acc ^ values.get(v as usize - 1));
        parity == self.rhs
    }
}

/// Total assignment of truth values to variables 1..n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: BitVec,
}

impl Assignment {
    pub fn all_false(n: usize) -> Self {
        Assignment {
            values: BitVec::zeros(n),
        }
    }

    pub fn from_bitvec(values: BitVec) -> Self {
        Assignment { values }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut bits = BitVec::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            bits.set(i, v);
        }
        Assignment { values: bits }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of 1-based variable `var`.
    pub fn get(&self, var: u32) -> bool {
        self.values.get(var as usize - 1)
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values.set(var as usize - 1, value);
    }

    pub fn bits(&self) -> &BitVec {
        &self.values
    }
}

/// A k-CNF-XOR formula over n variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    pub n: usize,
    pub k: usize,
    pub cnf: Vec<KClause>,
    #[serde(rename = "xor")]
    pub xors: Vec<XorClause>,
}

impl Formula {
    pub fn empty(n: usize, k: usize) -> Self {
        Formula {
            n,
            k,
            cnf: Vec::new(),
            xors: Vec::new(),
        }
    }

    /// True iff the assignment satisfies every CNF clause and every XOR clause.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, FormulaError> {
        if assignment.len() != self.n {
            return Err(FormulaError::LengthMismatch {
                expected: self.n,
                got: assignment.len(),
            });
        }
        let bits = assignment.bits();
        Ok(self.cnf.iter().all(|c| c.satisfied_by(bits))
            && self.xors.iter().all(|x| x.satisfied_by(bits)))
    }

    /// The XOR part as a GF(2) affine system (columns are variables − 1).
    pub fn xor_system(&self) -> Gf2System {
        let mut sys = Gf2System::new(self.n);
        for x in &self.xors {
            sys.push_row(Gf2Row::from_cols(
                self.n,
                x.vars.iter().map(|&v| v as usize - 1),
                x.rhs,
            ));
        }
        sys
    }
}

/// Parameters of the random model: k-clause density r and XOR density s
/// over n variables, with clause counts ⌈rn⌉ and ⌈sn⌉.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomModelParams {
    pub k: usize,
    pub n: usize,
    pub r: f64,
    pub s: f64,
}

impl RandomModelParams {
    pub fn new(k: usize, n: usize, r: f64, s: f64) -> Result<Self, FormulaError> {
        if k < 1 {
            return Err(FormulaError::InvalidParams("k must be at least 1".into()));
        }
        if n < 1 {
            return Err(FormulaError::InvalidParams("n must be at least 1".into()));
        }
        if k > n {
            return Err(FormulaError::InvalidParams(format!(
                "k = {k} exceeds n = {n}"
            )));
        }
        if !(r >= 0.0) || !(s >= 0.0) {
            return Err(FormulaError::InvalidParams(
                "densities must be non-negative".into(),
            ));
        }
        Ok(RandomModelParams { k, n, r, s })
    }

    pub fn cnf_count(&self) -> usize {
        ceil_density(self.r, self.n)
    }

    pub fn xor_count(&self) -> usize {
        ceil_density(self.s, self.n)
    }
}

/// ⌈density · n⌉ with a snap to the nearest integer within 1e-9, so that
/// products like 0.3 × 10 (= 3.0000000000000004 in binary) do not round up.
pub fn ceil_density(density: f64, n: usize) -> usize {
    let product = density * n as f64;
    let nearest = product.round();
    if (product - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        product.ceil() as usize
    }
}
