//! Small numeric utilities shared across the crate: compensated ordered
//! summation (all estimators average in record order so results are
//! reproducible), percentiles, and a 1-d golden-section optimizer.

/// Compensated (Neumaier) accumulator. Summation order is part of this
/// crate's determinism contract, so every mean/sum goes through this type
/// left to right.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Ordered compensated sum of an iterator.
pub fn sum_ordered<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Ordered compensated mean; 0.0 on an empty iterator.
pub fn mean_ordered<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::new();
    let mut n = 0usize;
    for x in xs {
        acc.add(x);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        acc.value() / n as f64
    }
}

/// Linear-interpolation percentile of a sorted slice, `q` in [0, 1].
/// Matches the common "type 7" definition. Panics if `sorted` is empty.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let q = q.clamp(0.0, 1.0);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Sample standard deviation (ddof = 1); 0.0 for fewer than two points.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean_ordered(xs.iter().copied());
    let var = sum_ordered(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64;
    var.max(0.0).sqrt()
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`. `rel_tol` bounds the final bracket width
/// relative to the argument scale.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * INVPHI;
    let mut d = a + (b - a) * INVPHI;
    let (mut fc, mut fd) = (f(c), f(d));
    // 1e-18 absolute floor keeps the loop finite near zero.
    while (b - a) > rel_tol * (a.abs() + b.abs()).max(1e-18) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INVPHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INVPHI;
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}
