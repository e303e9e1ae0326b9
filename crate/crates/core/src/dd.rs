//! Double-double arithmetic: an unevaluated sum of two f64 giving ~31
//! significant digits. The pigeonhole search multiplies irrational ratios by
//! integers up to 10^7; plain f64 would lose the fractional parts to
//! cancellation right where the collision test needs them.
//!
//! Only the handful of operations the search needs are implemented. All
//! algorithms are the classical error-free transformations (Dekker/Knuth);
//! products use a Veltkamp split so no fused-multiply-add support is
//! required.

/// `hi + lo` with |lo| ≤ ½ulp(hi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Exact sum: a + b = s + e with s = fl(a+b).
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// Exact sum assuming |a| ≥ |b|.
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Veltkamp split into two 26-bit halves.
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Exact product: a·b = p + e with p = fl(a·b).
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    // sqrt/π to 32 digits, second component = remainder after the f64 head
    pub const SQRT2: Dd = Dd { hi: 1.414_213_562_373_095_1, lo: -9.667_293_313_452_913e-17 };
    pub const SQRT3: Dd = Dd { hi: 1.732_050_807_568_877_2, lo: 1.003_508_422_180_690_3e-16 };
    pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_u64(x: u64) -> Dd {
        debug_assert!(x < (1 << 53));
        Dd { hi: x as f64, lo: 0.0 }
    }

    pub fn from_i64(x: i64) -> Dd {
        debug_assert!(x.unsigned_abs() < (1 << 53));
        Dd { hi: x as f64, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    #[cfg(test)]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    /// Product with an exactly representable f64 (integers up to 2^53).
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q0 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q0));
        let q1 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q0, q1);
        let (hi, lo) = quick_two_sum(s, e + q2);
        Dd { hi, lo }
    }

    /// Largest integer ≤ the represented value; exact.
    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            // hi is an integer: lo decides whether the value dips below it
            let (hi, lo) = two_sum(f, self.lo.floor());
            Dd { hi, lo }
        } else {
            // hi strictly inside (f, f+1): |lo| < spacing(hi) ≤ hi − f and
            // ≤ f + 1 − hi, so lo cannot move the value past either integer
            Dd { hi: f, lo: 0.0 }
        }
    }

    /// Fractional part in [0, 1).
    pub fn frac(self) -> Dd {
        let f = self.sub(self.floor());
        debug_assert!((0.0..=1.0).contains(&f.to_f64()));
        if f.hi < 0.0 {
            Dd::ZERO
        } else {
            f
        }
    }

    #[cfg(test)]
    pub fn lt(self, o: Dd) -> bool {
        self.hi < o.hi || (self.hi == o.hi && self.lo < o.lo)
    }
}
