//! Exact volume and exact integration of products of affine powers, both by a
//! pulling triangulation built from the vertex/constraint incidences.

use std::collections::HashMap;
use std::rc::Rc;

use dashu_int::ops::{Gcd, UnsignedAbs};
use dashu_int::{IBig, UBig};
use fixedbitset::FixedBitSet;

use super::vertices::{determinant, rank, vertex_data, VertexData};
use super::HPolytope;
use crate::error::{Error, Result};
use crate::rational::{factorial_rational, product, Rational};

pub const DEFAULT_DIMENSION_CAP: usize = 16;

/// `constant + linear · x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub constant: Rational,
    pub linear: Vec<Rational>,
}

impl AffineForm {
    pub fn new(constant: Rational, linear: Vec<Rational>) -> Self {
        Self { constant, linear }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (a, v) in self.linear.iter().zip(x) {
            if *a != Rational::ZERO {
                acc += a * v;
            }
        }
        acc
    }
}

pub fn volume(p: &HPolytope) -> Result<Rational> {
    volume_with_cap(p, DEFAULT_DIMENSION_CAP)
}

pub fn volume_with_cap(p: &HPolytope, dimension_cap: usize) -> Result<Rational> {
    integrate_with_cap(p, &[], dimension_cap)
}

/// `∫_P Π_j form_j(x)^{power_j} dx`, exactly.
pub fn integrate(p: &HPolytope, factors: &[(AffineForm, u32)]) -> Result<Rational> {
    integrate_with_cap(p, factors, DEFAULT_DIMENSION_CAP)
}

pub fn integrate_with_cap(
    p: &HPolytope,
    factors: &[(AffineForm, u32)],
    dimension_cap: usize,
) -> Result<Rational> {
    let polynomials: Vec<(AffineForm, Vec<Rational>)> = factors
        .iter()
        .map(|(f, k)| {
            let mut coefficients = vec![Rational::ZERO; *k as usize + 1];
            coefficients[*k as usize] = Rational::ONE;
            (f.clone(), coefficients)
        })
        .collect();
    integrate_polynomials_with_cap(p, &polynomials, dimension_cap)
}

/// `∫_P Π_j q_j(form_j(x)) dx` for univariate polynomials `q_j` given by
/// coefficients in increasing degree.
pub fn integrate_polynomials(p: &HPolytope, factors: &[(AffineForm, Vec<Rational>)]) -> Result<Rational> {
    integrate_polynomials_with_cap(p, factors, DEFAULT_DIMENSION_CAP)
}

pub fn integrate_polynomials_with_cap(
    p: &HPolytope,
    factors: &[(AffineForm, Vec<Rational>)],
    dimension_cap: usize,
) -> Result<Rational> {
    let d = p.dim();
    if let Some((f, _)) = factors.iter().find(|(f, _)| f.linear.len() != d) {
        return Err(Error::Argument(format!(
            "affine form has {} coefficients, polytope dimension is {d}",
            f.linear.len()
        )));
    }
    let factors: Vec<(&AffineForm, &[Rational])> = factors
        .iter()
        .map(|(f, q)| {
            let degree = q.iter().rposition(|c| *c != Rational::ZERO).map_or(0, |i| i + 1);
            (f, &q[..degree])
        })
        .collect();
    if factors.iter().any(|(_, q)| q.is_empty()) {
        return Ok(Rational::ZERO);
    }
    if d == 0 {
        let feasible = p.constraints().iter().all(|c| c.bound >= Rational::ZERO);
        if !feasible {
            return Ok(Rational::ZERO);
        }
        return Ok(product(factors.iter().map(|(f, q)| evaluate(q, &f.constant))));
    }
    if d > dimension_cap {
        return Err(Error::Resource(format!(
            "polytope dimension {d} exceeds the dimension cap {dimension_cap}"
        )));
    }

    let data = vertex_data(p)?;
    if data.len() < d + 1 || rank(&data.rays) < d + 1 {
        return Ok(Rational::ZERO);
    }

    // constant polynomials factor out
    let mut scale = Rational::ONE;
    let mut active: Vec<(&AffineForm, &[Rational])> = Vec::new();
    for (f, q) in factors {
        if q.len() == 1 {
            scale *= &q[0];
        } else {
            active.push((f, q));
        }
    }
    let powers: Vec<usize> = active.iter().map(|(_, q)| q.len() - 1).collect();
    let rational_values: Vec<Vec<Rational>> = (0..data.len())
        .map(|i| {
            let x = data.point(i);
            active.iter().map(|(f, _)| f.eval(&x)).collect()
        })
        .collect();
    // integer series: scale every vertex value by a common denominator L and
    // divide [t^M] by L^{|M|} afterwards
    let common = rational_values
        .iter()
        .flatten()
        .fold(UBig::ONE, |acc, v| {
            let den = v.denominator();
            let g = acc.clone().gcd(den);
            acc / g * den
        });
    let values: Vec<Vec<IBig>> = rational_values
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| v.numerator() * IBig::from(common.clone() / v.denominator()))
                .collect()
        })
        .collect();
    let common = Rational::from(common);

    let mut series = SimplexSeries::new(&powers);
    // weight of [t^M]: Π_j q_{j,M_j} M_j! / ((|M| + d)! L^{|M|})
    let weights: Vec<Rational> = series
        .indices()
        .map(|digits| {
            let mut w = Rational::ONE;
            for (j, &k) in digits.iter().enumerate() {
                if active[j].1[k] == Rational::ZERO {
                    return Rational::ZERO;
                }
                w *= &active[j].1[k] * factorial_rational(k);
            }
            let degree: usize = digits.iter().sum();
            w / (factorial_rational(degree + d) * common.pow(degree as isize))
        })
        .collect();

    let mut total = Rational::ZERO;
    for_each_simplex(&data, |simplex| {
        let matrix: Vec<Vec<IBig>> = simplex.iter().map(|&i| data.rays[i].clone()).collect();
        let det = determinant(matrix).unsigned_abs();
        let t_product: UBig = simplex
            .iter()
            .map(|&i| UBig::try_from(data.rays[i][0].clone()).expect("t > 0"))
            .product();
        let scaled_volume = Rational::from_parts(IBig::from(det), t_product);
        let coefficient = series.weighted_sum(simplex.iter().map(|&i| values[i].as_slice()), &weights);
        total += scaled_volume * coefficient;
    });
    Ok(total * scale)
}

fn evaluate(q: &[Rational], x: &Rational) -> Rational {
    q.iter().rev().fold(Rational::ZERO, |acc, c| acc * x + c)
}

// [t^M] Π_i 1/(1 − Σ_j t_j a_{ji}) over a simplex with vertex values a_{·i};
// the integral over the simplex is d!·vol·M!/(|M|+d)! times this coefficient.
struct SimplexSeries {
    powers: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
    buffer: Vec<IBig>,
}

impl SimplexSeries {
    fn new(powers: &[usize]) -> Self {
        let mut strides = Vec::with_capacity(powers.len());
        let mut size = 1usize;
        for &k in powers {
            strides.push(size);
            size *= k + 1;
        }
        Self {
            powers: powers.to_vec(),
            strides,
            size,
            buffer: vec![IBig::ZERO; size],
        }
    }

    // mixed-radix digits of every index, in index order
    fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let mut digits = vec![0usize; self.powers.len()];
        (0..self.size).map(move |idx| {
            if idx > 0 {
                for (j, digit) in digits.iter_mut().enumerate() {
                    if *digit < self.powers[j] {
                        *digit += 1;
                        break;
                    }
                    *digit = 0;
                }
            }
            digits.clone()
        })
    }

    fn weighted_sum<'a>(&mut self, vertices: impl Iterator<Item = &'a [IBig]>, weights: &[Rational]) -> Rational {
        if self.powers.is_empty() {
            return weights[0].clone();
        }
        let g = &mut self.buffer;
        g.iter_mut().for_each(|x| *x = IBig::ZERO);
        g[0] = IBig::ONE;
        let mut digits = vec![0usize; self.powers.len()];
        for a in vertices {
            digits.iter_mut().for_each(|x| *x = 0);
            for idx in 1..self.size {
                for (j, digit) in digits.iter_mut().enumerate() {
                    if *digit < self.powers[j] {
                        *digit += 1;
                        break;
                    }
                    *digit = 0;
                }
                let mut acc = IBig::ZERO;
                for (j, &digit) in digits.iter().enumerate() {
                    if digit > 0 && a[j] != IBig::ZERO {
                        acc += &a[j] * &g[idx - self.strides[j]];
                    }
                }
                if acc != IBig::ZERO {
                    g[idx] += acc;
                }
            }
        }
        g.iter()
            .zip(weights)
            .filter(|(x, w)| **w != Rational::ZERO && **x != IBig::ZERO)
            .fold(Rational::ZERO, |acc, (x, w)| acc + w * Rational::from(x.clone()))
    }
}

/// Calls `f` with the vertex indices of each simplex of the pulling
/// triangulation (apex of every face = its least vertex index).
pub(crate) fn for_each_simplex(data: &VertexData, mut f: impl FnMut(&[usize])) {
    let n = data.len();
    let constraint_count = data.tight.first().map_or(0, |t| t.len());
    let on_constraint: Vec<FixedBitSet> = (0..constraint_count)
        .map(|c| {
            let mut set = FixedBitSet::with_capacity(n);
            set.extend((0..n).filter(|&v| data.tight[v].contains(c)));
            set
        })
        .collect();
    let mut whole = FixedBitSet::with_capacity(n);
    whole.insert_range(..);
    let mut walker = Walker {
        on_constraint,
        memo: HashMap::new(),
        chain: Vec::new(),
    };
    walker.walk(&whole, &mut f);
}

struct Walker {
    on_constraint: Vec<FixedBitSet>,
    memo: HashMap<FixedBitSet, Rc<Vec<FixedBitSet>>>,
    chain: Vec<usize>,
}

impl Walker {
    fn walk(&mut self, face: &FixedBitSet, f: &mut impl FnMut(&[usize])) {
        let apex = face.minimum().expect("nonempty face");
        self.chain.push(apex);
        if face.count_ones(..) == 1 {
            f(&self.chain);
        } else {
            let facets = self.facets(face);
            for facet in facets.iter() {
                if !facet.contains(apex) {
                    self.walk(facet, f);
                }
            }
        }
        self.chain.pop();
    }

    // Facets of a face are the inclusion-maximal proper traces G ∩ T_i.
    fn facets(&mut self, face: &FixedBitSet) -> Rc<Vec<FixedBitSet>> {
        if let Some(hit) = self.memo.get(face) {
            return hit.clone();
        }
        let mut candidates: Vec<FixedBitSet> = Vec::new();
        for tight in &self.on_constraint {
            let mut trace = face.clone();
            trace.intersect_with(tight);
            if trace.is_clear() || trace == *face {
                continue;
            }
            if !candidates.contains(&trace) {
                candidates.push(trace);
            }
        }
        let maximal: Vec<FixedBitSet> = candidates
            .iter()
            .filter(|c| {
                !candidates
                    .iter()
                    .any(|o| o != *c && c.is_subset(o))
            })
            .cloned()
            .collect();
        let maximal = Rc::new(maximal);
        self.memo.insert(face.clone(), maximal.clone());
        maximal
    }
}
