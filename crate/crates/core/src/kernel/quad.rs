//! Globally adaptive Gauss–Kronrod (7/15) quadrature for matrix-valued integrands.

use super::dense::{operator_norm, CMat};
use crate::error::{Error, Result};
use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone)]
pub struct Quadrature {
    pub value: CMat,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-9,
            max_intervals: 4000,
        }
    }
}

struct Segment {
    lo: f64,
    hi: f64,
    value: CMat,
    error: f64,
}

fn gk15<F>(f: &F, lo: f64, hi: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<CMat>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = &fc * Complex64::new(WGK[7], 0.0);
    let mut gauss = &fc * Complex64::new(WG[3], 0.0);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let pair = f1 + f2;
        kronrod += &pair * Complex64::new(w, 0.0);
        if j % 2 == 1 {
            gauss += &pair * Complex64::new(WG[j / 2], 0.0);
        }
    }
    let scale = Complex64::new(half, 0.0);
    let value = kronrod * scale;
    let error = operator_norm(&(&value - gauss * scale));
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

/// `∫_a^b f(s) ds`, bisecting the segment with the largest error estimate until
/// the total estimate is below `max(abs_tol, rel_tol·‖result‖)`.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<CMat>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    let first = gk15(&f, a, b)?;
    let mut segments = vec![first];
    let mut evaluations = 15;
    loop {
        let total = segments
            .iter()
            .skip(1)
            .fold(segments[0].value.clone(), |acc, s| acc + &s.value);
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * operator_norm(&total));
        if err <= target || a == b {
            return Ok(Quadrature {
                value: total,
                error_estimate: err,
                evaluations,
                intervals: segments.len(),
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::NotConverged {
                what: "adaptive quadrature",
                horizon: segments.len() as f64,
                residual: err,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        segments.push(gk15(&f, seg.lo, mid)?);
        segments.push(gk15(&f, mid, seg.hi)?);
        evaluations += 30;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let q = integrate(|s| f(s).map(|z| CMat::from_element(1, 1, z)), a, b, opts)?;
    Ok((q.value[(0, 0)], q.error_estimate))
}
