use std::collections::BinaryHeap;

use super::AnalyticsError;

/// Accuracy targets for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-9,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureSpec {
            abs_tol: tol,
            rel_tol: tol / 10.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(AnalyticsError::Domain(format!(
                "quadrature tolerances must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod (10/21) integration of `f` over the
/// finite interval `[a, b]`: the piece with the largest error estimate is
/// bisected until the total estimate meets `max(abs_tol, rel_tol |I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral, AnalyticsError> {
    spec.validate()?;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let (value, error) = gk21(&f, a, b);
    let mut heap = BinaryHeap::from([Piece { a, b, value, error }]);
    let mut total = value;
    let mut err = error;
    let mut pieces = 1;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= target {
            return Ok(Integral {
                value: total,
                abs_error: err,
            });
        }
        if pieces >= spec.max_subdivisions {
            return Err(AnalyticsError::NoConvergence {
                achieved: err,
                requested: target,
            });
        }
        let worst = heap.pop().expect("at least one piece");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk21(&f, worst.a, mid);
        let (rv, re) = gk21(&f, mid, worst.b);
        total += lv + rv - worst.value;
        err += le + re - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        pieces += 1;
        if !err.is_finite() || !total.is_finite() {
            return Err(AnalyticsError::NoConvergence {
                achieved: f64::INFINITY,
                requested: target,
            });
        }
        if pieces % 64 == 0 {
            // re-sum to shed accumulated cancellation in the running totals
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// `∫_{a}^{∞} f`, for `f` decaying at least like `e^{-rate s}`, through the
/// substitution `u = e^{-rate (s - a)}` which maps the tail onto `(0, 1]`.
pub fn integrate_tail(
    f: impl Fn(f64) -> f64,
    a: f64,
    rate: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, AnalyticsError> {
    integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let s = a - u.ln() / rate;
            f(s) / (rate * u)
        },
        0.0,
        1.0,
        spec,
    )
}
