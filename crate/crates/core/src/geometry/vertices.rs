//! Vertex enumeration by the double-description method on the homogenized
//! cone `{(t, x) : b t - a x >= 0, t >= 0}`, in exact integer arithmetic.

use dashu_int::ops::{Gcd, UnsignedAbs};
use dashu_int::{IBig, UBig};
use fixedbitset::FixedBitSet;

use super::HPolytope;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Vertices as primitive integer rays `(t, x)` with `t > 0`, plus for each
/// vertex the set of tight constraint indices.
pub(crate) struct VertexData {
    pub rays: Vec<Vec<IBig>>,
    pub tight: Vec<FixedBitSet>,
}

impl VertexData {
    pub fn point(&self, i: usize) -> Vec<Rational> {
        let ray = &self.rays[i];
        let t = UBig::try_from(ray[0].clone()).expect("t > 0");
        ray[1..]
            .iter()
            .map(|x| Rational::from_parts(x.clone(), t.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }
}

struct Ray {
    v: Vec<IBig>,
    zero: FixedBitSet,
}

fn dot(a: &[IBig], b: &[IBig]) -> IBig {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [IBig]) {
    let mut g = UBig::ZERO;
    for x in v.iter() {
        if *x != IBig::ZERO {
            g = if g == UBig::ZERO {
                x.clone().unsigned_abs()
            } else {
                (&g).gcd(&x.clone().unsigned_abs())
            };
        }
    }
    if g > UBig::ONE {
        let g = IBig::from(g);
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
}

// a*u + b*w, primitive.
fn combine(a: &IBig, u: &[IBig], b: &IBig, w: &[IBig]) -> Vec<IBig> {
    let mut out: Vec<IBig> = u.iter().zip(w).map(|(x, y)| a * x + b * y).collect();
    normalize(&mut out);
    out
}

/// Scales `(bound, -coefficients)` to a primitive integer row.
fn integer_row(coefficients: &[Rational], bound: &Rational) -> Vec<IBig> {
    let mut entries: Vec<Rational> = Vec::with_capacity(coefficients.len() + 1);
    entries.push(bound.clone());
    entries.extend(coefficients.iter().map(|c| -c.clone()));
    let mut lcm = UBig::ONE;
    for e in &entries {
        let d = e.denominator();
        let g = (&lcm).gcd(d);
        lcm = &lcm / &g * d;
    }
    let lcm = IBig::from(lcm);
    let mut row: Vec<IBig> = entries
        .iter()
        .map(|e| e.numerator() * (&lcm / IBig::from(e.denominator().clone())))
        .collect();
    normalize(&mut row);
    row
}

fn homogenized_rows(p: &HPolytope) -> Vec<Vec<IBig>> {
    let mut rows: Vec<Vec<IBig>> = p
        .constraints()
        .iter()
        .map(|c| integer_row(&c.coefficients, &c.bound))
        .collect();
    let mut t_row = vec![IBig::ZERO; p.dim() + 1];
    t_row[0] = IBig::ONE;
    rows.push(t_row);
    rows
}

pub(crate) fn vertex_data(p: &HPolytope) -> Result<VertexData> {
    let n = p.dim() + 1;
    let rows = homogenized_rows(p);
    let m = rows.len();
    let t_index = m - 1;

    let mut lineality: Vec<Vec<IBig>> = (0..n)
        .map(|i| {
            let mut e = vec![IBig::ZERO; n];
            e[i] = IBig::ONE;
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    let mut processed = FixedBitSet::with_capacity(m);

    // t >= 0 first, then the constraints in input order
    let order = std::iter::once(t_index).chain(0..t_index);
    for idx in order {
        let h = &rows[idx];
        let pivot = lineality.iter().position(|l| dot(h, l) != IBig::ZERO);
        if let Some(pos) = pivot {
            let mut l = lineality.swap_remove(pos);
            let mut hl = dot(h, &l);
            if hl < IBig::ZERO {
                l.iter_mut().for_each(|x| *x = -x.clone());
                hl = -hl;
            }
            for lj in lineality.iter_mut() {
                let hj = dot(h, lj);
                if hj != IBig::ZERO {
                    *lj = combine(&hl, lj, &-hj, &l);
                }
            }
            for r in rays.iter_mut() {
                let hr = dot(h, &r.v);
                if hr != IBig::ZERO {
                    r.v = combine(&hl, &r.v, &-hr, &l);
                }
                r.zero.insert(idx);
            }
            rays.push(Ray {
                v: l,
                zero: processed.clone(),
            });
        } else {
            let signs: Vec<IBig> = rays.iter().map(|r| dot(h, &r.v)).collect();
            let positive: Vec<usize> = (0..rays.len()).filter(|&i| signs[i] > IBig::ZERO).collect();
            let negative: Vec<usize> = (0..rays.len()).filter(|&i| signs[i] < IBig::ZERO).collect();
            let min_common = n.saturating_sub(lineality.len() + 2);
            let mut created = Vec::new();
            for &i in &positive {
                for &j in &negative {
                    let mut common = rays[i].zero.clone();
                    common.intersect_with(&rays[j].zero);
                    if common.count_ones(..) < min_common {
                        continue;
                    }
                    let adjacent = rays.iter().enumerate().all(|(k, r)| {
                        k == i || k == j || !common.is_subset(&r.zero)
                    });
                    if !adjacent {
                        continue;
                    }
                    let v = combine(&signs[i], &rays[j].v, &-signs[j].clone(), &rays[i].v);
                    common.insert(idx);
                    created.push(Ray { v, zero: common });
                }
            }
            let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
            for (i, mut r) in rays.into_iter().enumerate() {
                if signs[i] == IBig::ZERO {
                    r.zero.insert(idx);
                    kept.push(r);
                } else if signs[i] > IBig::ZERO {
                    kept.push(r);
                }
            }
            kept.extend(created);
            rays = kept;
        }
        processed.insert(idx);
    }

    let has_vertex = rays.iter().any(|r| r.v[0] > IBig::ZERO);
    if !has_vertex {
        return Ok(VertexData {
            rays: Vec::new(),
            tight: Vec::new(),
        });
    }
    if !lineality.is_empty() || rays.iter().any(|r| r.v[0] == IBig::ZERO) {
        return Err(Error::Unbounded);
    }

    let mut tagged: Vec<(Vec<Rational>, Ray)> = rays
        .into_iter()
        .map(|mut r| {
            r.zero.set(t_index, false);
            let t = UBig::try_from(r.v[0].clone()).expect("t > 0");
            let point = r.v[1..]
                .iter()
                .map(|x| Rational::from_parts(x.clone(), t.clone()))
                .collect();
            (point, r)
        })
        .collect();
    tagged.sort_by(|a, b| a.0.cmp(&b.0));
    tagged.dedup_by(|a, b| a.0 == b.0);
    let (rays, tight) = tagged
        .into_iter()
        .map(|(_, r)| {
            let mut tight = FixedBitSet::with_capacity(t_index);
            tight.extend(r.zero.ones().filter(|&i| i < t_index));
            (r.v, tight)
        })
        .unzip();
    Ok(VertexData { rays, tight })
}

/// All vertices of a bounded polytope, sorted lexicographically. Empty when
/// the polytope is infeasible.
pub fn enumerate_vertices(p: &HPolytope) -> Result<Vec<Vec<Rational>>> {
    let data = vertex_data(p)?;
    Ok((0..data.len()).map(|i| data.point(i)).collect())
}

/// Rank of an integer matrix given as rows.
pub(crate) fn rank(rows: &[Vec<IBig>]) -> usize {
    let mut m: Vec<Vec<IBig>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != IBig::ZERO) else {
            continue;
        };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[c].clone();
            if f != IBig::ZERO {
                let pv = pivot_row[c].clone();
                *row = combine(&pv, row, &-f, &pivot_row);
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant by fraction-free (Bareiss) elimination.
pub(crate) fn determinant(mut m: Vec<Vec<IBig>>) -> IBig {
    let n = m.len();
    if n == 0 {
        return IBig::ONE;
    }
    let mut negate = false;
    let mut prev = IBig::ONE;
    for k in 0..n - 1 {
        if m[k][k] == IBig::ZERO {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != IBig::ZERO) else {
                return IBig::ZERO;
            };
            m.swap(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}
