use crate::rational::Rational;

/// Power series in `z` truncated after degree `cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl Series {
    pub fn zero(cap: usize) -> Self {
        Self {
            coeffs: vec![Rational::ZERO; cap + 1],
        }
    }

    pub fn one(cap: usize) -> Self {
        let mut s = Self::zero(cap);
        s.coeffs[0] = Rational::ONE;
        s
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, degree: usize) -> &Rational {
        &self.coeffs[degree]
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn add_assign(&mut self, other: &Series) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if *b != Rational::ZERO {
                *a += b;
            }
        }
    }

    pub fn sub_assign(&mut self, other: &Series) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if *b != Rational::ZERO {
                *a -= b;
            }
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let cap = self.cap();
        let mut out = Series::zero(cap);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Rational::ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(cap + 1 - i) {
                if *b != Rational::ZERO {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }

    /// `self += c z^shift · other`.
    pub fn add_shifted(&mut self, c: &Rational, shift: usize, other: &Series) {
        for (j, b) in other.coeffs.iter().enumerate() {
            let d = shift + j;
            if d > self.cap() {
                break;
            }
            if *b != Rational::ZERO {
                self.coeffs[d] += c * b;
            }
        }
    }

    /// `log` of a series with constant term 1, via `j l_j = j p_j - Σ_{i<j} i l_i p_{j-i}`.
    pub fn log(&self) -> Series {
        assert!(self.coeffs[0] == Rational::ONE, "log needs constant term 1");
        let cap = self.cap();
        let p = &self.coeffs;
        let mut l = vec![Rational::ZERO; cap + 1];
        for j in 1..=cap {
            let mut acc = p[j].clone() * Rational::from(j as u64);
            for i in 1..j {
                if l[i] != Rational::ZERO && p[j - i] != Rational::ZERO {
                    acc -= Rational::from(i as u64) * &l[i] * &p[j - i];
                }
            }
            l[j] = acc / Rational::from(j as u64);
        }
        Series { coeffs: l }
    }

    /// Sum of the coefficients of degree `1..=cap`: the value at `z = 1` minus
    /// the constant term.
    pub fn positive_part_at_one(&self) -> Rational {
        self.coeffs[1..].iter().fold(Rational::ZERO, |acc, c| acc + c)
    }
}
