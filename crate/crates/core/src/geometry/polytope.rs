use crate::error::{Error, Result};
use crate::rational::{sum, Rational};

/// One half-space `coefficients · x <= bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub bound: Rational,
}

/// Half-space representation over exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPolytope {
    dim: usize,
    constraints: Vec<Constraint>,
}

impl HPolytope {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds `a · x <= b`.
    pub fn add_le(&mut self, coefficients: Vec<Rational>, bound: Rational) -> Result<()> {
        if coefficients.len() != self.dim {
            return Err(Error::Argument(format!(
                "constraint has {} coefficients, polytope dimension is {}",
                coefficients.len(),
                self.dim
            )));
        }
        self.constraints.push(Constraint {
            coefficients,
            bound,
        });
        Ok(())
    }

    /// Adds `a · x >= b`.
    pub fn add_ge(&mut self, coefficients: Vec<Rational>, bound: Rational) -> Result<()> {
        self.add_le(coefficients.into_iter().map(|c| -c).collect(), -bound)
    }

    /// Adds `lo <= x_i <= hi` for every coordinate.
    pub fn add_box(&mut self, lo: &Rational, hi: &Rational) {
        for i in 0..self.dim {
            let mut unit = vec![Rational::ZERO; self.dim];
            unit[i] = Rational::ONE;
            self.add_le(unit.clone(), hi.clone()).expect("unit row");
            self.add_ge(unit, lo.clone()).expect("unit row");
        }
    }

    /// The image under `x -> s x` for `s > 0`.
    pub fn scaled(&self, s: &Rational) -> Self {
        Self {
            dim: self.dim,
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coefficients: c.coefficients.clone(),
                    bound: &c.bound * s,
                })
                .collect(),
        }
    }

    /// Reorders coordinates: new coordinate `i` is old coordinate `perm[i]`.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        Self {
            dim: self.dim,
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coefficients: perm.iter().map(|&j| c.coefficients[j].clone()).collect(),
                    bound: c.bound.clone(),
                })
                .collect(),
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.constraints.iter().all(|c| {
            let lhs = sum(c.coefficients.iter().zip(x).map(|(a, v)| a * v));
            lhs <= c.bound
        })
    }
}
