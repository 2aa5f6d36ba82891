//! Closed-form source expressions over `x1, x2, x3`.

use crate::error::{Error, Result};
use exmex::prelude::*;
use exmex::FlatEx;
use std::fmt;
use std::sync::Arc;

/// Parsed arithmetic expression in the variables `x1`, `x2`, `x3`.
#[derive(Clone)]
pub struct Expr {
    text: String,
    // shared: the parsed form is large and sources hold dozens of these
    ex: Option<Arc<FlatEx<f64>>>,
    // position of each sorted variable name in (x1, x2, x3)
    slots: Vec<usize>,
    constant: Option<f64>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.text)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::Expression("empty expression".into()));
        }
        let ex = exmex::parse::<f64>(trimmed).map_err(|e| Error::Expression(format!("`{trimmed}`: {e}")))?;
        let mut slots = Vec::new();
        for name in ex.var_names() {
            let s = match name.as_str() {
                "x1" => 0,
                "x2" => 1,
                "x3" => 2,
                other => {
                    return Err(Error::Expression(format!("unknown variable `{other}` in `{trimmed}`")));
                }
            };
            slots.push(s);
        }
        let constant = if slots.is_empty() {
            Some(ex.eval(&[]).map_err(|e| Error::Expression(e.to_string()))?)
        } else {
            None
        };
        Ok(Expr { text: trimmed.to_string(), ex: Some(Arc::new(ex)), slots, constant })
    }

    pub fn zero() -> Self {
        Expr { text: "0".into(), ex: None, slots: vec![], constant: Some(0.0) }
    }

    pub fn constant(v: f64) -> Self {
        Expr { text: format!("{v:?}"), ex: None, slots: vec![], constant: Some(v) }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// True when the expression is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        self.constant == Some(0.0)
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let mut vals = [0.0; 3];
        for (k, &s) in self.slots.iter().enumerate() {
            vals[k] = x[s];
        }
        self.ex
            .as_ref()
            .expect("non-constant expression is parsed")
            .eval(&vals[..self.slots.len()])
            .unwrap_or(f64::NAN)
    }

    /// Same expression multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Expr::parse(&format!("({:?})*({})", t, self.text))
    }
}
