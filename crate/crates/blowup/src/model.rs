//! The two data inputs of the problem: the nonlinearity `g` (with its
//! antiderivative `G` and the quotient map `𝒢`) and the potential `a`
//! (with its spherical envelopes `ā`, `a̲` and oscillation `a_osc`).

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quad::PrefixCache;
use crate::rootfind::bisect;
use crate::scalar::Real;
use crate::transform::{log_grid, ProblemParams};

/// Declared family of the nonlinearity `g(s)`, `s ≥ 0`, nondecreasing
/// with `g(0) = 0`.
#[derive(Debug, Clone)]
pub enum NonlinearityKind<R> {
    /// `λ s^q`, `λ > 0`, `q > 0`.
    Power { coeff: R, exponent: R },
    /// `λ s^q ln(1+s)^ρ`, `λ > 0`, `q ≥ 0`, `ρ ≥ 0`, not both exponents 0.
    PowerLog { coeff: R, exponent: R, log_exponent: R },
    /// Shape-preserving interpolation of nondecreasing samples starting
    /// at `(0, 0)`; continued as a power law beyond the last sample.
    Tabulated(MonotoneCubic<R>),
}

pub struct Nonlinearity<R> {
    kind: NonlinearityKind<R>,
    /// Monotone-quotient exponent: `g(t)/t^δ` nondecreasing when set.
    delta: Option<R>,
    g_prefix: PrefixCache<R>,
    screen: OnceLock<CalGScreen<R>>,
}

/// Result of the numeric monotonicity screen for `𝒢`.
#[derive(Debug, Clone, Serialize)]
pub struct CalGScreen<R> {
    pub strictly_increasing: bool,
    pub constant: bool,
    /// First probe pair that violated strict increase, if any.
    pub violation_at: Option<R>,
    /// Screen window `[t0, t1]`.
    pub window: (R, R),
}

impl<R: Real> Nonlinearity<R> {
    pub fn new(kind: NonlinearityKind<R>, delta: Option<R>) -> Result<Self> {
        match &kind {
            NonlinearityKind::Power { coeff, exponent } => {
                if !(*coeff > R::zero()) {
                    return Err(Error::Precondition("power nonlinearity: coeff > 0 required".into()));
                }
                if !(*exponent > R::zero()) {
                    return Err(Error::Precondition(
                        "power nonlinearity: exponent > 0 required so that g(0) = 0".into(),
                    ));
                }
            }
            NonlinearityKind::PowerLog { coeff, exponent, log_exponent } => {
                if !(*coeff > R::zero()) || *exponent < R::zero() || *log_exponent < R::zero() {
                    return Err(Error::Precondition(
                        "power-log nonlinearity: coeff > 0, exponent ≥ 0, log_exponent ≥ 0 required".into(),
                    ));
                }
                if *exponent == R::zero() && *log_exponent == R::zero() {
                    return Err(Error::Precondition(
                        "power-log nonlinearity: g would be constant; g(0) = 0 required".into(),
                    ));
                }
            }
            NonlinearityKind::Tabulated(table) => {
                if table.x_min() != R::zero() {
                    return Err(Error::Precondition("tabulated g: first abscissa must be 0".into()));
                }
                if table.values()[0] != R::zero() {
                    return Err(Error::Precondition("tabulated g: g(0) = 0 required".into()));
                }
                if !table.data_nondecreasing() {
                    return Err(Error::Precondition("tabulated g: samples must be nondecreasing".into()));
                }
            }
        }
        let g = Nonlinearity { kind, delta, g_prefix: PrefixCache::new(R::of(1e-11)), screen: OnceLock::new() };
        if let Some(d) = delta {
            if d < R::zero() {
                return Err(Error::Precondition("delta ≥ 0 required".into()));
            }
            // Numeric screen of the monotone-quotient hypothesis.
            let probes = log_grid(R::of(1e-3), R::of(1e6), 40);
            let mut prev = R::neg_infinity();
            for &t in &probes {
                let q = g.eval(t) / t.powf(d);
                if q < prev * (R::one() - R::of(1e-9)) {
                    return Err(Error::Precondition(format!(
                        "g(t)/t^δ is not nondecreasing (drop near t = {t})"
                    )));
                }
                prev = prev.max(q);
            }
        }
        Ok(g)
    }

    pub fn power(coeff: R, exponent: R) -> Result<Self> {
        Self::new(NonlinearityKind::Power { coeff, exponent }, None)
    }

    pub fn kind(&self) -> &NonlinearityKind<R> {
        &self.kind
    }

    pub fn delta(&self) -> Option<R> {
        self.delta
    }

    /// `g(t)` for `t ≥ 0`.
    pub fn eval(&self, t: R) -> R {
        debug_assert!(t >= R::zero());
        if t <= R::zero() {
            return R::zero();
        }
        match &self.kind {
            NonlinearityKind::Power { coeff, exponent } => *coeff * t.powf(*exponent),
            NonlinearityKind::PowerLog { coeff, exponent, log_exponent } => {
                *coeff * t.powf(*exponent) * t.ln_1p().powf(*log_exponent)
            }
            NonlinearityKind::Tabulated(table) => table.eval(t).max(R::zero()),
        }
    }

    /// `G(t) = ∫₀ᵗ g`, closed form for the power family, cached segmented
    /// quadrature otherwise.
    pub fn antiderivative(&self, t: R, tol: R) -> Result<R> {
        if t < R::zero() {
            return Err(Error::Precondition(format!("G(t): t ≥ 0 required (got {t})")));
        }
        if t == R::zero() {
            return Ok(R::zero());
        }
        match &self.kind {
            NonlinearityKind::Power { coeff, exponent } => {
                Ok(*coeff * t.powf(*exponent + R::one()) / (*exponent + R::one()))
            }
            _ => self.g_prefix.integral_to(&|s| self.eval(s), t, tol),
        }
    }

    /// `𝒢(t) = (t/2) g(t)^{-1/(p-1)}`, `t > 0`.
    pub fn cal_g(&self, params: &ProblemParams<R>, t: R) -> Result<R> {
        if !(t > R::zero()) {
            return Err(Error::Precondition(format!("𝒢(t): t > 0 required (got {t})")));
        }
        let gt = self.eval(t);
        if !(gt > R::zero()) {
            return Err(Error::DegenerateNonlinearity(format!("𝒢 undefined: g({t}) = {gt}")));
        }
        Ok(t * R::of(0.5) * gt.powf(-(params.p() - R::one()).recip()))
    }

    /// Numeric monotonicity screen for `𝒢` on `[t0, 1e9]`; cached. The
    /// pure-power case is decided exactly: `𝒢` is constant at `q = p-1`
    /// and decreasing for `q > p-1`.
    pub fn screen_cal_g(&self, params: &ProblemParams<R>, t0: R) -> &CalGScreen<R> {
        self.screen.get_or_init(|| {
            let window = (t0.max(R::of(1e-9)), R::of(1e9));
            if let NonlinearityKind::Power { exponent, .. } = &self.kind {
                let margin = params.p() - R::one() - *exponent;
                return CalGScreen {
                    strictly_increasing: margin > R::zero(),
                    constant: margin == R::zero(),
                    violation_at: if margin < R::zero() { Some(window.0) } else { None },
                    window,
                };
            }
            let probes = log_grid(window.0, window.1, 120);
            let mut prev = R::neg_infinity();
            let mut violation_at = None;
            let mut seen_increase = false;
            for &t in &probes {
                let v = match self.cal_g(params, t) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if prev.is_finite() {
                    if v <= prev {
                        violation_at = Some(t);
                        break;
                    }
                    seen_increase = true;
                }
                prev = v;
            }
            CalGScreen {
                strictly_increasing: violation_at.is_none() && seen_increase,
                constant: false,
                violation_at,
                window,
            }
        })
    }

    /// `𝒢⁻¹(y)`: closed form `(2 y λ^{1/(p-1)})^{(p-1)/(p-1-q)}` for pure
    /// powers with `q < p-1`, bracketed bisection otherwise.
    pub fn cal_g_inverse(&self, params: &ProblemParams<R>, y: R, tol: R) -> Result<R> {
        if !(y > R::zero()) {
            return Err(Error::Precondition(format!("𝒢⁻¹(y): y > 0 required (got {y})")));
        }
        let pm1 = params.p() - R::one();
        if let NonlinearityKind::Power { coeff, exponent } = &self.kind {
            let margin = pm1 - *exponent;
            if margin <= R::zero() {
                return Err(Error::NotInvertible(
                    "𝒢",
                    format!("power nonlinearity with q = {} ≥ p-1 = {pm1} makes 𝒢 non-increasing", exponent),
                ));
            }
            let base = R::of(2.0) * y * coeff.powf(pm1.recip());
            return Ok(base.powf(pm1 / margin));
        }
        let screen = self.screen_cal_g(params, R::of(1e-9));
        if !screen.strictly_increasing {
            return Err(Error::NotInvertible(
                "𝒢",
                match screen.violation_at {
                    Some(t) => format!("monotonicity screen failed near t = {t}"),
                    None => "monotonicity screen failed".into(),
                },
            ));
        }
        // Expand a bracket [lo, hi] with 𝒢(lo) ≤ y ≤ 𝒢(hi).
        let mut lo = R::one();
        let mut hi = R::one();
        let mut guard = 0;
        while self.cal_g(params, lo)? > y {
            lo *= R::of(0.25);
            guard += 1;
            if guard > 240 {
                return Err(Error::NotInvertible("𝒢", format!("y = {y} below reachable range")));
            }
        }
        guard = 0;
        while self.cal_g(params, hi)? < y {
            hi *= R::of(4.0);
            guard += 1;
            if guard > 240 {
                return Err(Error::NotInvertible("𝒢", format!("y = {y} above reachable range")));
            }
        }
        let mut f = |t: R| self.cal_g(params, t);
        let (t, _res) = bisect(&mut f, y, lo, hi, tol.max(R::epsilon() * y), 200)?;
        Ok(t)
    }
}

/// Declared family of a radial factor `b(r) ≥ 0`.
#[derive(Debug, Clone)]
pub enum RadialProfile<R> {
    Constant(R),
    /// `coeff (1+r)^{exponent}`.
    Decay { coeff: R, exponent: R },
    Tabulated(MonotoneCubic<R>),
}

impl<R: Real> RadialProfile<R> {
    pub fn eval(&self, r: R) -> R {
        match self {
            RadialProfile::Constant(c) => *c,
            RadialProfile::Decay { coeff, exponent } => *coeff * (R::one() + r).powf(*exponent),
            RadialProfile::Tabulated(t) => t.eval(r),
        }
    }
}

/// The potential `a(x) ≥ 0`. The angular coordinate is the planar angle
/// for `N = 2` and the polar angle for axisymmetric `N = 3`.
pub enum Potential<R> {
    Radial { profile: RadialProfile<R> },
    /// `a = base(r) + modulation(r) · cos(mode·θ - phase)`.
    RadialAngular {
        base: RadialProfile<R>,
        modulation: RadialProfile<R>,
        mode: u32,
        phase: R,
        dim: u32,
        samples: usize,
    },
    /// Closure-backed potential `a(r, θ)`, sampled like `RadialAngular`.
    GeneralSampled { eval: Arc<dyn Fn(R, R) -> R + Send + Sync>, dim: u32, samples: usize },
}

/// Spherical envelopes of `a` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Radialized<R> {
    pub lower: R,
    pub upper: R,
    pub osc: R,
}

impl<R: Real> Potential<R> {
    pub fn radial(profile: RadialProfile<R>) -> Result<Self> {
        let p = Potential::Radial { profile };
        p.validate()?;
        Ok(p)
    }

    pub fn radial_angular(
        base: RadialProfile<R>,
        modulation: RadialProfile<R>,
        mode: u32,
        phase: R,
        dim: u32,
        samples: usize,
    ) -> Result<Self> {
        if mode == 0 {
            return Err(Error::Precondition("angular mode ≥ 1 required".into()));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::Precondition("angular potentials need N = 2 or axisymmetric N = 3".into()));
        }
        let p = Potential::RadialAngular { base, modulation, mode, phase, dim, samples: samples.max(8) };
        p.validate()?;
        Ok(p)
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Potential::Radial { .. })
    }

    /// Point evaluation `a(r, θ)`; the angle is ignored for radial kinds
    /// and at the center, where the single-point sphere convention
    /// `a(0) = base(0)` applies.
    pub fn eval(&self, r: R, theta: R) -> R {
        match self {
            Potential::Radial { profile } => profile.eval(r),
            Potential::RadialAngular { base, modulation, mode, phase, .. } => {
                if r == R::zero() {
                    return base.eval(R::zero());
                }
                base.eval(r) + modulation.eval(r) * (R::of(*mode as f64) * theta - *phase).cos()
            }
            Potential::GeneralSampled { eval, .. } => {
                if r == R::zero() {
                    return eval(R::zero(), R::zero());
                }
                eval(r, theta)
            }
        }
    }

    /// `(a̲(r), ā(r), a_osc(r))`: extrema of `a` over the sphere `|x| = r`
    /// by dense angular sampling, doubled until stable; exact pass-through
    /// for radial potentials and at the center.
    pub fn radialize(&self, r: R) -> Result<Radialized<R>> {
        if r < R::zero() {
            return Err(Error::Precondition(format!("radialize: r ≥ 0 required (got {r})")));
        }
        match self {
            Potential::Radial { profile } => {
                let v = profile.eval(r);
                self.check_value(v, r)?;
                Ok(Radialized { lower: v, upper: v, osc: R::zero() })
            }
            Potential::RadialAngular { dim, samples, .. } | Potential::GeneralSampled { dim, samples, .. } => {
                if r == R::zero() {
                    let v = self.eval(R::zero(), R::zero());
                    self.check_value(v, r)?;
                    return Ok(Radialized { lower: v, upper: v, osc: R::zero() });
                }
                let full_circle = *dim == 2;
                let mut count = (*samples).max(8);
                let mut prev: Option<(R, R)> = None;
                loop {
                    let (lo, hi) = self.angular_extrema(r, count, full_circle)?;
                    let stable = prev.is_some_and(|(plo, phi)| {
                        let scale = hi.abs().max(R::one());
                        (lo - plo).abs() <= R::of(1e-9) * scale && (hi - phi).abs() <= R::of(1e-9) * scale
                    });
                    if stable || count >= (1 << 20) {
                        return Ok(Radialized { lower: lo, upper: hi, osc: (hi - lo).max(R::zero()) });
                    }
                    prev = Some((lo, hi));
                    count *= 2;
                }
            }
        }
    }

    /// Min/max over `count` angular samples, each polished by the vertex of
    /// the parabola through the best sample and its neighbors. The polish
    /// removes the sample-alignment error that would otherwise stall the
    /// doubling criterion.
    fn angular_extrema(&self, r: R, count: usize, full_circle: bool) -> Result<(R, R)> {
        let theta_at = |j: usize| -> R {
            if full_circle {
                R::of(2.0 * std::f64::consts::PI) * R::of(j as f64) / R::of(count as f64)
            } else {
                R::of(std::f64::consts::PI) * R::of(j as f64) / R::of((count - 1) as f64)
            }
        };
        let mut values = Vec::with_capacity(count);
        for j in 0..count {
            let v = self.eval(r, theta_at(j));
            self.check_value(v, r)?;
            values.push(v);
        }
        let (mut imin, mut imax) = (0usize, 0usize);
        for (j, &v) in values.iter().enumerate() {
            if v < values[imin] {
                imin = j;
            }
            if v > values[imax] {
                imax = j;
            }
        }
        let polish = |j: usize| -> R {
            let (jm, jp) = if full_circle {
                ((j + count - 1) % count, (j + 1) % count)
            } else {
                if j == 0 || j == count - 1 {
                    return values[j];
                }
                (j - 1, j + 1)
            };
            let (vm, v0, vp) = (values[jm], values[j], values[jp]);
            let denom = vm - R::of(2.0) * v0 + vp;
            if denom.abs() <= R::epsilon() * v0.abs().max(R::one()) {
                return values[j];
            }
            let step = theta_at(1) - theta_at(0);
            let offset = R::of(0.5) * (vm - vp) / denom;
            let theta = theta_at(j) + offset.max(-R::one()).min(R::one()) * step;
            self.eval(r, theta)
        };
        let hi = values[imax].max(polish(imax));
        let lo = values[imin].min(polish(imin));
        Ok((lo, hi))
    }

    fn check_value(&self, v: R, r: R) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("potential not finite at r = {r}")));
        }
        if v < R::zero() {
            return Err(Error::Domain(format!("potential negative at r = {r}: {v}")));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let mut probes: Vec<R> = log_grid(R::of(1e-6), R::of(1e6), 25);
        probes.push(R::zero());
        for &r in &probes {
            self.radialize(r)?;
        }
        Ok(())
    }
}
