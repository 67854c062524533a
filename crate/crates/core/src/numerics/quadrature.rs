use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Relative tolerance.
    pub rel_tol: f64,
    /// Absolute tolerance.
    pub abs_tol: f64,
    /// Maximum number of subintervals kept by the adaptive scheme.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-12, max_subdivisions: 1 << 15 }
    }
}

impl QuadratureConfig {
    /// Configuration with the given relative tolerance and default
    /// absolute tolerance.
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    /// Same limits with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            max_subdivisions: self.max_subdivisions,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::InvalidArgument(alloc::format!(
                "quadrature tolerances must be positive (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// A value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    /// Integral value.
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
}

impl Estimate {
    /// Exact value with zero error.
    pub const fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    /// Multiply value and error by a constant.
    pub fn scale(self, factor: f64) -> Self {
        Self { value: self.value * factor, error: self.error * factor.abs() }
    }
}

impl core::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

impl core::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value - rhs.value, error: self.error + rhs.error }
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (1.0f64).min((200.0 * error / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Returns [`Error::SubdivisionLimit`] with the partial value when the
/// tolerance `max(abs_tol, rel_tol * |value|)` cannot be met.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    integrate_breakpoints(f, &[a, b], cfg)
}

/// Adaptive quadrature over `[points[0], points[last]]`, starting from the
/// panels delimited by `points` (which must be non-decreasing). Use this
/// when the integrand has known kinks.
pub fn integrate_breakpoints<F>(mut f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument(alloc::format!(
            "integration limits must be ordered (got {points:?})"
        )));
    }
    let span = points[points.len() - 1] - points[0];
    if span == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let min_width = 64.0 * f64::EPSILON * span.max(points[0].abs().max(points[points.len() - 1].abs()));

    let mut heap = BinaryHeap::new();
    let mut settled = Estimate::default();
    let mut total = Estimate::default();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = kronrod15(&mut f, w[0], w[1]);
            total.value += p.value;
            total.error += p.error;
            heap.push(p);
        }
    }

    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.value.abs());
        if total.error <= tol || heap.is_empty() {
            break;
        }
        if heap.len() + 1 > cfg.max_subdivisions {
            return Err(Error::SubdivisionLimit { value: total.value, error: total.error });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a < min_width {
            // Resolution limit: keep the panel as is.
            settled.value += worst.value;
            settled.error += worst.error;
            continue;
        }
        let left = kronrod15(&mut f, worst.a, mid);
        let right = kronrod15(&mut f, mid, worst.b);
        total.value += left.value + right.value - worst.value;
        total.error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if !total.value.is_finite() {
            return Err(Error::InvalidArgument("integrand is not finite".into()));
        }
    }

    // Re-sum to avoid drift from the incremental updates.
    let mut out = settled;
    for p in heap.iter() {
        out.value += p.value;
        out.error += p.error;
    }
    Ok(out)
}

/// Integrate `f(t_1, ..., t_dim)` over the ordered simplex
/// `lower <= t_1 <= ... <= t_dim <= upper` by nested adaptive passes.
///
/// Each inner level runs with tolerances ten times tighter than the level
/// enclosing it. `breaks` are extra panel boundaries (kinks of the
/// integrand) applied at every level.
pub fn integrate_simplex<F>(
    mut f: F,
    dim: usize,
    lower: f64,
    upper: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if !(upper >= lower) {
        return Err(Error::InvalidArgument("simplex upper bound below lower bound".into()));
    }
    let mut coords = Vec::with_capacity(dim);
    nested(&mut f, &mut coords, dim, lower, upper, breaks, cfg)
}

pub(crate) fn panel_points(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(breaks.len() + 2);
    pts.push(lo);
    pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    pts.push(hi);
    pts
}

fn nested(
    f: &mut dyn FnMut(&[f64]) -> f64,
    coords: &mut Vec<f64>,
    dim: usize,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let pts = panel_points(lo, hi, breaks);
    if coords.len() + 1 == dim {
        return integrate_breakpoints(
            |x| {
                coords.push(x);
                let v = f(coords);
                coords.pop();
                v
            },
            &pts,
            cfg,
        );
    }
    let inner_cfg = cfg.tightened(10.0);
    let mut failure = None;
    let mut worst_inner = 0.0f64;
    let outer = integrate_breakpoints(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            coords.push(x);
            let r = nested(f, coords, dim, x, hi, breaks, &inner_cfg);
            coords.pop();
            match r {
                Ok(est) => {
                    worst_inner = worst_inner.max(est.error);
                    est.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        &pts,
        cfg,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Estimate { value: outer.value, error: outer.error + worst_inner * (hi - lo) })
}
