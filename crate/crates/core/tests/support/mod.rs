//! Test-only extended-precision (double-double, ~32 significant digits)
//! complex arithmetic and a power-series Bessel evaluator used as an
//! independent oracle for the production kernel.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p) - e + self.lo;
        let q2 = r / d;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub fn from(re: f64, im: f64) -> DdComplex {
        DdComplex {
            re: Dd::from(re),
            im: Dd::from(im),
        }
    }

    pub fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    pub fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn div_f64(self, d: f64) -> DdComplex {
        DdComplex {
            re: self.re.div_f64(d),
            im: self.im.div_f64(d),
        }
    }

    pub fn neg(self) -> DdComplex {
        DdComplex {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn norm_estimate(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    pub fn to_f64(self) -> (f64, f64) {
        (self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

/// `J_n(z)` by the defining power series in double-double arithmetic.
/// Accurate to ~1e-10 relative for |z| <= 50 (the series loses about
/// |z| / ln(10) digits to cancellation, well within the ~32 carried).
pub fn bessel_j_oracle(order: u32, re: f64, im: f64) -> (f64, f64) {
    let half = DdComplex::from(re / 2.0, im / 2.0);
    // Leading term (z/2)^n / n!.
    let mut term = DdComplex::from(1.0, 0.0);
    for k in 1..=order {
        term = term.mul(half).div_f64(k as f64);
    }
    let half_sq = half.mul(half);
    let mut sum = term;
    for k in 1..400 {
        term = term
            .mul(half_sq)
            .div_f64(k as f64)
            .div_f64((k + order) as f64)
            .neg();
        sum = sum.add(term);
        if term.norm_estimate() < 1e-45 * sum.norm_estimate().max(1e-300) {
            break;
        }
    }
    sum.to_f64()
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn oracle_matches_known_values() {
        let (re, im) = bessel_j_oracle(0, 0.0, 0.0);
        assert_eq!((re, im), (1.0, 0.0));
        let (re, _) = bessel_j_oracle(1, 1.0, 0.0);
        assert!((re - 0.440_050_585_744_933_5).abs() < 1e-15);
        let (re, _) = bessel_j_oracle(0, 10.0, 0.0);
        assert!((re - (-0.245_935_764_451_348_34)).abs() < 1e-14);
    }
}
