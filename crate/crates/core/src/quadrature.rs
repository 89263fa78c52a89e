//! Adaptive Gauss–Kronrod (7, 15) quadrature in one and two dimensions.

// Nodes and weights are kept at their published precision.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Subdivision cap of the global adaptive scheme.
const MAX_PANELS: usize = 2_000;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
}

/// One Gauss–Kronrod panel with the QUADPACK error estimate.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut fv = [(0.0, 0.0); 7];
    for k in 0..7 {
        let dx = half * XGK[k];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[k] = (f1, f2);
        kronrod += WGK[k] * (f1 + f2);
        abs_sum += WGK[k] * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (k, &(f1, f2)) in fv.iter().enumerate() {
        asc += WGK[k] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (result, err)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by repeatedly
/// bisecting the panel with the largest error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    let (value, error) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, value, error)];
    let mut total_err = error;
    let mut evaluations = 15;
    while total_err > tol && total_err.is_finite() {
        if panels.len() >= MAX_PANELS {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        total_err = panels.iter().map(|p| p.3).sum();
    }
    let value: f64 = panels.iter().map(|p| p.2).sum();
    if total_err > tol || !value.is_finite() || !total_err.is_finite() {
        return Err(Error::Numerical {
            what: "adaptive quadrature",
            achieved: total_err,
        });
    }
    Ok(Quadrature {
        value,
        error: total_err,
        evaluations,
    })
}

/// Integrates `f(x, y)` over the rectangle `[x0, x1] × [y0, y1]` by nested
/// adaptive quadrature.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    tol: f64,
) -> Result<Quadrature> {
    let inner_tol = tol / (4.0 * (x1 - x0).max(1.0));
    let mut failure: Option<Error> = None;
    let mut inner_error = 0.0;
    let mut evaluations = 0;
    let outer = integrate(
        |x| match integrate(|y| f(x, y), y0, y1, inner_tol) {
            Ok(q) => {
                inner_error = f64::max(inner_error, q.error);
                evaluations += q.evaluations;
                q.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        x0,
        x1,
        0.5 * tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Quadrature {
        value: outer.value,
        error: outer.error + inner_error * (x1 - x0),
        evaluations,
    })
}
