//! Slowly varying frequency profiles `Omega(s)`, `s = eps * t`.
//!
//! Four analytic families plus tabulated data:
//!
//! | name          | `Omega(s)`                      |
//! |---------------|---------------------------------|
//! | `constant`    | `Omega0`                        |
//! | `decaying`    | `Omega0 (1 + s^2)^(-1/2)`       |
//! | `growing`     | `Omega0 (1 + s^2)^(1/2)`        |
//! | `oscillating` | `Omega0 (1 + gamma sin 2s)`     |
//! | `tabulated`   | monotone cubic through `(s, Omega)` samples |
//!
//! Profiles must stay strictly positive; near a zero of `Omega` the
//! asymptotic formulas downstream lose validity, so such profiles are
//! rejected outright.
//!
//! The phase integral `∫ Omega(eps t') dt'` has a closed form for every
//! analytic family; tabulated profiles fall back to adaptive Simpson
//! quadrature.

use crate::error::{Error, Result};
use crate::Real;

/// Absolute tolerance used for quadrature phase integrals.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// A named, parameterized slowly varying frequency `Omega(eps t)`.
///
/// Immutable after construction; all evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyProfile<T: Real> {
    Constant { omega0: T },
    Decaying { omega0: T },
    Growing { omega0: T },
    Oscillating { omega0: T, gamma: T },
    Tabulated(MonotoneCubic<T>),
}

impl<T: Real> FrequencyProfile<T> {
    pub fn constant(omega0: T) -> Result<Self> {
        check_omega0(omega0)?;
        Ok(Self::Constant { omega0 })
    }

    pub fn decaying(omega0: T) -> Result<Self> {
        check_omega0(omega0)?;
        Ok(Self::Decaying { omega0 })
    }

    pub fn growing(omega0: T) -> Result<Self> {
        check_omega0(omega0)?;
        Ok(Self::Growing { omega0 })
    }

    /// `Omega0 (1 + gamma sin 2s)` with `0 < gamma < 1` so the profile
    /// cannot touch zero.
    pub fn oscillating(omega0: T, gamma: T) -> Result<Self> {
        check_omega0(omega0)?;
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(Error::invalid(format!(
                "oscillating profile needs gamma in (0, 1), got {gamma}"
            )));
        }
        Ok(Self::Oscillating { omega0, gamma })
    }

    /// Monotone-cubic interpolation through `(s, Omega)` samples.
    ///
    /// The abscissae must be strictly increasing and every ordinate strictly
    /// positive; the interpolant then stays positive on the covered range.
    pub fn tabulated(points: Vec<(T, T)>) -> Result<Self> {
        Ok(Self::Tabulated(MonotoneCubic::new(points)?))
    }

    /// `Omega` evaluated at slow argument `s` directly.
    pub fn omega_at_slow(&self, s: T) -> Result<T> {
        let value = match self {
            Self::Constant { omega0 } => *omega0,
            Self::Decaying { omega0 } => *omega0 / (T::one() + s * s).sqrt(),
            Self::Growing { omega0 } => *omega0 * (T::one() + s * s).sqrt(),
            Self::Oscillating { omega0, gamma } => *omega0 * (T::one() + *gamma * (s + s).sin()),
            Self::Tabulated(table) => table.eval(s)?,
        };
        if value <= T::zero() {
            return Err(Error::NonPositiveFrequency {
                arg: s.as_f64(),
                omega: value.as_f64(),
            });
        }
        Ok(value)
    }

    /// `d Omega / d s` at slow argument `s`.
    pub fn omega_slow_derivative(&self, s: T) -> Result<T> {
        Ok(match self {
            Self::Constant { .. } => T::zero(),
            Self::Decaying { omega0 } => {
                let w = T::one() + s * s;
                -*omega0 * s * w.powf(T::of(-1.5))
            }
            Self::Growing { omega0 } => *omega0 * s / (T::one() + s * s).sqrt(),
            Self::Oscillating { omega0, gamma } => *omega0 * *gamma * T::of(2.0) * (s + s).cos(),
            Self::Tabulated(table) => table.derivative(s)?,
        })
    }

    /// `Omega(eps t)`.
    pub fn omega_eval(&self, eps: T, t: T) -> Result<T> {
        self.omega_at_slow(eps * t)
    }

    /// `Omega(0)`, the reference frequency the amplitude law is pinned to.
    pub fn omega_ref(&self) -> Result<T> {
        self.omega_at_slow(T::zero())
    }

    /// Signed phase integral `∫_{t0}^{t} Omega(eps t') dt'`.
    ///
    /// Closed forms for the analytic families; adaptive Simpson at absolute
    /// tolerance [`QUADRATURE_TOL`] for tabulated data.
    pub fn phase_integral(&self, eps: T, t0: T, t: T) -> Result<T> {
        // For eps = 0 every profile is frozen at Omega(0).
        if eps == T::zero() {
            return Ok(self.omega_ref()? * (t - t0));
        }
        match self {
            Self::Constant { omega0 } => Ok(*omega0 * (t - t0)),
            Self::Decaying { omega0 } => {
                Ok(*omega0 / eps * ((eps * t).asinh() - (eps * t0).asinh()))
            }
            Self::Growing { omega0 } => {
                // antiderivative of sqrt(1 + u^2): (u sqrt(1+u^2) + asinh u) / 2
                let anti = |u: T| (u * (T::one() + u * u).sqrt() + u.asinh()) / T::of(2.0);
                Ok(*omega0 / eps * (anti(eps * t) - anti(eps * t0)))
            }
            Self::Oscillating { omega0, gamma } => {
                let two_eps = eps + eps;
                let osc = ((two_eps * t0).cos() - (two_eps * t).cos()) / two_eps;
                Ok(*omega0 * ((t - t0) + *gamma * osc))
            }
            Self::Tabulated(_) => self.phase_integral_quadrature(eps, t0, t, T::of(QUADRATURE_TOL)),
        }
    }

    /// Phase integral by adaptive Simpson quadrature, available for every
    /// profile so closed forms can be cross-checked against it.
    pub fn phase_integral_quadrature(&self, eps: T, t0: T, t: T, tol: T) -> Result<T> {
        if t == t0 {
            return Ok(T::zero());
        }
        let (a, b, sign) = if t >= t0 {
            (t0, t, T::one())
        } else {
            (t, t0, -T::one())
        };
        let f = |x: T| self.omega_eval(eps, x);
        Ok(sign * adaptive_simpson(&f, a, b, tol)?)
    }
}

fn check_omega0<T: Real>(omega0: T) -> Result<()> {
    if omega0 <= T::zero() {
        return Err(Error::invalid(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    Ok(())
}

/// Parse a two-column `t,omega` CSV (header row required) into table points.
pub fn parse_table_csv<T: Real>(text: &str) -> Result<Vec<(T, T)>> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if idx == 0 || line.is_empty() {
            continue; // header
        }
        let mut cols = line.split(',');
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::invalid(format!(
                "table line {}: expected two comma-separated columns",
                idx + 1
            )));
        };
        let parse = |s: &str| -> Result<T> {
            s.trim()
                .parse::<f64>()
                .map(T::of)
                .map_err(|_| Error::invalid(format!("table line {}: bad number '{s}'", idx + 1)))
        };
        points.push((parse(a)?, parse(b)?));
    }
    Ok(points)
}

/// Monotonicity-preserving (Fritsch-Carlson) cubic Hermite interpolant.
///
/// On each interval the interpolant stays within the range of its endpoint
/// ordinates, so strictly positive data yields a strictly positive curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("tabulated profile needs at least 2 points"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(
                    "tabulated abscissae must be strictly increasing",
                ));
            }
        }
        if let Some((s, y)) = points.iter().find(|(_, y)| *y <= T::zero()) {
            return Err(Error::NonPositiveFrequency {
                arg: s.as_f64(),
                omega: y.as_f64(),
            });
        }

        let xs: Vec<T> = points.iter().map(|p| p.0).collect();
        let ys: Vec<T> = points.iter().map(|p| p.1).collect();
        let n = xs.len();
        let d: Vec<T> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();

        let mut m = vec![T::zero(); n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= T::zero() {
                T::zero()
            } else {
                (d[i - 1] + d[i]) / T::of(2.0)
            };
        }
        // Fritsch-Carlson limiter keeps every interval free of overshoot.
        let three = T::of(3.0);
        for i in 0..n - 1 {
            if d[i] == T::zero() {
                m[i] = T::zero();
                m[i + 1] = T::zero();
                continue;
            }
            let a = m[i] / d[i];
            let b = m[i + 1] / d[i];
            if a < T::zero() {
                m[i] = T::zero();
            }
            if b < T::zero() {
                m[i + 1] = T::zero();
            }
            let a = m[i] / d[i];
            let b = m[i + 1] / d[i];
            let r2 = a * a + b * b;
            if r2 > three * three {
                let tau = three / r2.sqrt();
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }

        Ok(Self { xs, ys, slopes: m })
    }

    fn locate(&self, x: T) -> Result<usize> {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return Err(Error::OutOfRange {
                value: x.as_f64(),
                min: self.xs[0].as_f64(),
                max: self.xs[n - 1].as_f64(),
            });
        }
        // last interval whose left edge is <= x
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    pub fn eval(&self, x: T) -> Result<T> {
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let u = (x - self.xs[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let h00 = two * u3 - three * u2 + T::one();
        let h10 = u3 - two * u2 + u;
        let h01 = -two * u3 + three * u2;
        let h11 = u3 - u2;
        Ok(h00 * self.ys[i]
            + h * h10 * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h * h11 * self.slopes[i + 1])
    }

    pub fn derivative(&self, x: T) -> Result<T> {
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let u = (x - self.xs[i]) / h;
        let u2 = u * u;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let six = T::of(6.0);
        let four = T::of(4.0);
        let dh00 = six * u2 - six * u;
        let dh10 = three * u2 - four * u + T::one();
        let dh01 = -six * u2 + six * u;
        let dh11 = three * u2 - two * u;
        Ok((dh00 * self.ys[i] + dh01 * self.ys[i + 1]) / h
            + dh10 * self.slopes[i]
            + dh11 * self.slopes[i + 1])
    }

    pub fn range(&self) -> (T, T) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> Result<T>, a: T, b: T, tol: T) -> Result<T> {
    let half = T::of(0.5);
    let c = (a + b) * half;
    let fa = f(a)?;
    let fb = f(b)?;
    let fc = f(c)?;
    let whole = simpson(fa, fc, fb, b - a);
    simpson_recurse(f, a, b, fa, fb, fc, whole, tol, 60)
}

fn simpson<T: Real>(fa: T, fm: T, fb: T, h: T) -> T {
    h / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<T: Real>(
    f: &impl Fn(T) -> Result<T>,
    a: T,
    b: T,
    fa: T,
    fb: T,
    fc: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Result<T> {
    let half = T::of(0.5);
    let c = (a + b) * half;
    let d = (a + c) * half;
    let e = (c + b) * half;
    let fd = f(d)?;
    let fe = f(e)?;
    let left = simpson(fa, fd, fc, c - a);
    let right = simpson(fc, fe, fb, b - c);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= T::of(15.0) * tol {
        return Ok(left + right + diff / T::of(15.0));
    }
    let half_tol = tol * half;
    Ok(
        simpson_recurse(f, a, c, fa, fc, fd, left, half_tol, depth - 1)?
            + simpson_recurse(f, c, b, fc, fb, fe, right, half_tol, depth - 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles() -> Vec<FrequencyProfile<f64>> {
        vec![
            FrequencyProfile::constant(1.0).unwrap(),
            FrequencyProfile::decaying(1.0).unwrap(),
            FrequencyProfile::growing(1.0).unwrap(),
            FrequencyProfile::oscillating(1.0, 0.7).unwrap(),
        ]
    }

    #[test]
    fn omega_eval_closed_forms() {
        let constant = FrequencyProfile::constant(1.0).unwrap();
        assert_eq!(constant.omega_eval(0.1, 7.0).unwrap(), 1.0);

        let decaying = FrequencyProfile::decaying(1.0).unwrap();
        let got = decaying.omega_eval(0.1, 10.0).unwrap();
        assert!((got - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15, "got {got}");

        let osc = FrequencyProfile::oscillating(1.0, 0.7).unwrap();
        assert_eq!(osc.omega_eval(0.1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn phase_integral_constant() {
        let p = FrequencyProfile::constant(1.0).unwrap();
        let got = p.phase_integral(0.1, 0.0, std::f64::consts::PI).unwrap();
        assert!((got - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn phase_integral_oscillating() {
        let p = FrequencyProfile::oscillating(1.0, 0.7).unwrap();
        let got = p.phase_integral(0.1, 0.0, 5.0).unwrap();
        let expect = 5.0 + 0.7 * (1.0 - 1.0_f64.cos()) / 0.2;
        assert!((got - expect).abs() < 1e-13, "got {got}, expect {expect}");
    }

    #[test]
    fn phase_integral_decaying_vs_quadrature() {
        let p = FrequencyProfile::decaying(1.0).unwrap();
        let closed = p.phase_integral(0.1, 0.0, 10.0).unwrap();
        assert!((closed - 1.0_f64.asinh() / 0.1).abs() < 1e-12);
        let quad = p.phase_integral_quadrature(0.1, 0.0, 10.0, 1e-10).unwrap();
        assert!((closed - quad).abs() < 1e-9, "closed {closed} quad {quad}");
    }

    #[test]
    fn closed_forms_match_quadrature_everywhere() {
        for p in profiles() {
            for &eps in &[0.0, 0.05, 0.2] {
                for &(t0, t) in &[(0.0, 100.0), (0.0, 37.5), (12.5, 80.0), (40.0, 10.0)] {
                    let closed = p.phase_integral(eps, t0, t).unwrap();
                    let quad = p.phase_integral_quadrature(eps, t0, t, 1e-11).unwrap();
                    assert!(
                        (closed - quad).abs() < 1e-8,
                        "{p:?} eps={eps} [{t0},{t}]: closed {closed} quad {quad}"
                    );
                }
            }
        }
    }

    #[test]
    fn phase_integral_additive_and_monotone() {
        for p in profiles() {
            let eps = 0.1;
            let full = p.phase_integral(eps, -5.0, 60.0).unwrap();
            let split = p.phase_integral(eps, -5.0, 20.0).unwrap()
                + p.phase_integral(eps, 20.0, 60.0).unwrap();
            assert!((full - split).abs() < 1e-9, "{p:?}");

            let mut prev = p.phase_integral(eps, 0.0, 0.0).unwrap();
            for i in 1..=100 {
                let cur = p.phase_integral(eps, 0.0, i as f64).unwrap();
                assert!(cur > prev, "{p:?} not increasing at t = {i}");
                prev = cur;
            }
        }
    }

    #[test]
    fn tabulated_tracks_sampled_profile() {
        let source = FrequencyProfile::decaying(1.0).unwrap();
        let pts: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let s = i as f64 * 0.05;
                (s, source.omega_at_slow(s).unwrap())
            })
            .collect();
        let table = FrequencyProfile::tabulated(pts).unwrap();
        for i in 0..=100 {
            let t = i as f64;
            let got = table.omega_eval(0.1, t).unwrap();
            let want = source.omega_eval(0.1, t).unwrap();
            assert!((got - want).abs() < 2e-6, "t={t}: {got} vs {want}");
            assert!(got > 0.0);
        }
        let closed = source.phase_integral(0.1, 0.0, 100.0).unwrap();
        let quad = table.phase_integral(0.1, 0.0, 100.0).unwrap();
        assert!((closed - quad).abs() < 1e-4, "{closed} vs {quad}");
    }

    #[test]
    fn tabulated_derivative_matches_interpolant() {
        let source = FrequencyProfile::oscillating(2.0, 0.5).unwrap();
        let pts: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let s = i as f64 * 0.01;
                (s, source.omega_at_slow(s).unwrap())
            })
            .collect();
        let table = match FrequencyProfile::tabulated(pts).unwrap() {
            FrequencyProfile::Tabulated(t) => t,
            _ => unreachable!(),
        };
        // Probe at knot midpoints: a centered difference straddling a knot
        // picks up the curvature jump of the piecewise cubic.
        for i in 1..40 {
            let s = 0.09 * i as f64 + 0.005;
            let h = 1e-6;
            let fd = (table.eval(s + h).unwrap() - table.eval(s - h).unwrap()) / (2.0 * h);
            let an = table.derivative(s).unwrap();
            assert!((fd - an).abs() < 1e-7, "s = {s}: {an} vs fd {fd}");
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(FrequencyProfile::<f64>::tabulated(vec![(0.0, 1.0)]).is_err());
        assert!(FrequencyProfile::tabulated(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(matches!(
            FrequencyProfile::tabulated(vec![(0.0, 1.0), (1.0, -0.5)]),
            Err(Error::NonPositiveFrequency { .. })
        ));
        let table = FrequencyProfile::tabulated(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!(matches!(
            table.omega_eval(0.1, 20.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn oscillating_gamma_validation() {
        assert!(FrequencyProfile::oscillating(1.0, 0.0).is_err());
        assert!(FrequencyProfile::oscillating(1.0, 1.0).is_err());
        assert!(FrequencyProfile::oscillating(1.0, -0.3).is_err());
        assert!(FrequencyProfile::constant(-1.0).is_err());
    }

    #[test]
    fn csv_parsing() {
        let text = "t,omega\n0.0,1.0\n0.5,0.9\n\n1.0,0.8\n";
        let pts: Vec<(f64, f64)> = parse_table_csv(text).unwrap();
        assert_eq!(pts, vec![(0.0, 1.0), (0.5, 0.9), (1.0, 0.8)]);
        assert!(parse_table_csv::<f64>("t,omega\n1.0\n").is_err());
        assert!(parse_table_csv::<f64>("t,omega\nx,1.0\n").is_err());
    }

    #[test]
    fn generic_scalar_smoke() {
        let p = FrequencyProfile::<f32>::decaying(1.0).unwrap();
        let got = p.omega_eval(0.1, 10.0).unwrap();
        assert!((got - 1.0 / 2.0_f32.sqrt()).abs() < 1e-6);
        let full = p.phase_integral(0.1, 0.0, 10.0).unwrap();
        let split =
            p.phase_integral(0.1, 0.0, 4.0).unwrap() + p.phase_integral(0.1, 4.0, 10.0).unwrap();
        assert!((full - split).abs() < 1e-4);
    }
}
