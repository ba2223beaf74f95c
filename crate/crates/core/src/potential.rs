//! Initial profiles, their truncations and restrictions, and the
//! admissibility conditions on the initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};

/// Built-in profile families and sampled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `depth · sech²((x − center)/width)`.
    SechWell { depth: f64, width: f64, center: f64 },
    /// `depth` on `(left, right)`.
    SquareWell { depth: f64, left: f64, right: f64 },
    /// `depth · exp(−((x − center)/width)²)`.
    Gaussian { depth: f64, width: f64, center: f64 },
    /// `amplitude · (1 + x)^(−power)` for `x > 0`.
    PowerTail { amplitude: f64, power: f64 },
    /// `amplitude · (1 + sin(frequency·x))` for `x ≤ cutoff − 1`, blended to
    /// zero on `[cutoff − 1, cutoff]`; bounded, no decay at −∞.
    LeftOscillatory { amplitude: f64, frequency: f64, cutoff: f64 },
    /// Linear interpolation through `(xs, values)`; zero outside.
    Sampled { xs: Vec<f64>, values: Vec<f64> },
    Sum { parts: Vec<Profile> },
}

impl Profile {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::SechWell { depth, width, center } => {
                let u = (x - center) / width;
                if u.abs() > 350.0 {
                    return 0.0;
                }
                let s = 1.0 / u.cosh();
                depth * s * s
            }
            Profile::SquareWell { depth, left, right } => {
                if x > *left && x < *right {
                    *depth
                } else {
                    0.0
                }
            }
            Profile::Gaussian { depth, width, center } => {
                let u = (x - center) / width;
                depth * (-u * u).exp()
            }
            Profile::PowerTail { amplitude, power } => {
                if x > 0.0 {
                    amplitude * (1.0 + x).powf(-power)
                } else {
                    0.0
                }
            }
            Profile::LeftOscillatory { amplitude, frequency, cutoff } => {
                if x >= *cutoff {
                    return 0.0;
                }
                let tau = (cutoff - x).min(1.0);
                let blend = tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
                amplitude * (1.0 + (frequency * x).sin()) * blend
            }
            Profile::Sampled { xs, values } => interpolate(xs, values, x),
            Profile::Sum { parts } => parts.iter().map(|p| p.eval(x)).sum(),
        }
    }

    fn natural_support(&self) -> (f64, f64) {
        match self {
            Profile::Zero => (0.0, 0.0),
            Profile::SechWell { .. } | Profile::Gaussian { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Profile::SquareWell { left, right, .. } => (*left, *right),
            Profile::PowerTail { .. } => (0.0, f64::INFINITY),
            Profile::LeftOscillatory { cutoff, .. } => (f64::NEG_INFINITY, *cutoff),
            Profile::Sampled { xs, .. } => (xs[0], xs[xs.len() - 1]),
            Profile::Sum { parts } => parts
                .iter()
                .map(Profile::natural_support)
                .filter(|(a, b)| b > a)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| {
                    (a.min(c), b.max(d))
                }),
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Profile::SquareWell { left, right, .. } => out.extend([*left, *right]),
            Profile::PowerTail { .. } => out.push(0.0),
            Profile::LeftOscillatory { cutoff, .. } => out.extend([cutoff - 1.0, *cutoff]),
            Profile::Sampled { xs, .. } => out.extend(xs.iter().copied()),
            Profile::Sum { parts } => parts.iter().for_each(|p| p.breakpoints(out)),
            _ => {}
        }
    }

    /// Upper bound for `∫_X^∞ (1+|x|)|q|` (right) or `∫_{−∞}^X` (left).
    fn tail_bound(&self, x: f64, right: bool) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::SechWell { depth, width, center } => {
                let u = if right { (x - center) / width } else { (center - x) / width };
                if u <= 0.0 {
                    return f64::INFINITY;
                }
                2.0 * depth.abs() * width * (1.0 + x.abs() + 0.5 * width) * (-2.0 * u).exp()
            }
            Profile::Gaussian { depth, width, center } => {
                let u = if right { (x - center) / width } else { (center - x) / width };
                if u <= 0.0 {
                    return f64::INFINITY;
                }
                depth.abs()
                    * (-u * u).exp()
                    * ((1.0 + center.abs()) * width / (2.0 * u) + 0.5 * width * width)
            }
            Profile::SquareWell { left, right: r, depth } => {
                let outside = if right { x >= *r } else { x <= *left };
                if outside {
                    0.0
                } else {
                    depth.abs() * (r - left) * (1.0 + left.abs().max(r.abs()))
                }
            }
            Profile::PowerTail { amplitude, power } => {
                if !right {
                    return if x <= 0.0 { 0.0 } else { f64::INFINITY };
                }
                if *power <= 2.0 {
                    return f64::INFINITY;
                }
                amplitude.abs() * (1.0 + x.max(0.0)).powf(2.0 - power) / (power - 2.0)
            }
            Profile::LeftOscillatory { amplitude, cutoff, .. } => {
                if right {
                    if x >= *cutoff {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else if amplitude.abs() == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Profile::Sampled { xs, values } => {
                let outside = if right { x >= xs[xs.len() - 1] } else { x <= xs[0] };
                if outside {
                    0.0
                } else {
                    let l1: f64 = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                    l1 * (xs[xs.len() - 1] - xs[0]) * (1.0 + xs[0].abs().max(xs[xs.len() - 1].abs()))
                }
            }
            Profile::Sum { parts } => parts.iter().map(|p| p.tail_bound(x, right)).sum(),
        }
    }
}

fn interpolate(xs: &[f64], values: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let idx = xs.partition_point(|&v| v <= x);
    if idx == 0 {
        return values[0];
    }
    if idx >= xs.len() {
        return values[xs.len() - 1];
    }
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let t = (x - x0) / (x1 - x0);
    values[idx - 1] * (1.0 - t) + values[idx] * t
}

/// Which half-line to keep in [`Potential::restrict`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A real profile `q` on the line with declared support.
///
/// `q` vanishes identically outside the open interval `(lo, hi)`; `shift`
/// translates the underlying family, `q(x) = profile(x − shift)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub profile: Profile,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub shift: f64,
    pub description: String,
}

impl Potential {
    pub fn new(profile: Profile, description: impl Into<String>) -> Result<Self> {
        validate(&profile)?;
        let (lo, hi) = profile.natural_support();
        Ok(Self {
            profile,
            lo,
            hi,
            shift: 0.0,
            description: description.into(),
        })
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero, "zero").expect("zero profile is valid")
    }

    pub fn sech_well(depth: f64, width: f64, center: f64) -> Self {
        Self::new(
            Profile::SechWell { depth, width, center },
            format!("{depth}·sech²((x−{center})/{width})"),
        )
        .expect("sech well parameters")
    }

    pub fn square_well(depth: f64, left: f64, right: f64) -> Self {
        Self::new(
            Profile::SquareWell { depth, left, right },
            format!("{depth} on ({left},{right})"),
        )
        .expect("square well parameters")
    }

    pub fn gaussian(depth: f64, width: f64, center: f64) -> Self {
        Self::new(
            Profile::Gaussian { depth, width, center },
            format!("{depth}·exp(−((x−{center})/{width})²)"),
        )
        .expect("gaussian parameters")
    }

    pub fn power_tail(amplitude: f64, power: f64) -> Self {
        Self::new(
            Profile::PowerTail { amplitude, power },
            format!("{amplitude}·(1+x)^−{power}, x>0"),
        )
        .expect("power tail parameters")
    }

    pub fn left_oscillatory(amplitude: f64, frequency: f64, cutoff: f64) -> Self {
        Self::new(
            Profile::LeftOscillatory { amplitude, frequency, cutoff },
            format!("{amplitude}·(1+sin({frequency}x)) left of {cutoff}"),
        )
        .expect("oscillatory tail parameters")
    }

    pub fn sampled(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Profile::Sampled { xs, values }, "sampled")
    }

    /// Parse two-column `x q` text; `#` starts a comment.
    pub fn from_two_column(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut it = content.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(v)), None) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ => {
                    return Err(Error::Format(format!(
                        "line {}: expected two numeric columns",
                        lineno + 1
                    )))
                }
            }
        }
        Self::sampled(xs, vs)
    }

    pub fn sum(parts: Vec<Potential>) -> Result<Self> {
        if parts.iter().any(|p| p.shift != 0.0 || p.lo > p.profile.natural_support().0 || p.hi < p.profile.natural_support().1) {
            return Err(Error::InvalidInput(
                "sum expects unmodified family potentials".into(),
            ));
        }
        let desc = parts.iter().map(|p| p.description.as_str()).collect::<Vec<_>>().join(" + ");
        Self::new(
            Profile::Sum {
                parts: parts.into_iter().map(|p| p.profile).collect(),
            },
            desc,
        )
    }

    /// `q(x)`; exactly zero outside `(lo, hi)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        if !(x > self.lo && x < self.hi) {
            return 0.0;
        }
        self.profile.eval(x - self.shift)
    }

    /// Mean of the one-sided limits, for nodes that may sit on a jump.
    pub fn evaluate_mid(&self, x: f64) -> f64 {
        let eps = 1e-11 * (1.0 + x.abs());
        0.5 * (self.evaluate(x - eps) + self.evaluate(x + eps))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Zero) || self.hi <= self.lo
    }

    /// `q_b`: equal to `q` on `(b, ∞)`, zero on `(−∞, b]`.
    pub fn truncate_left(&self, b: f64) -> Self {
        let mut out = self.clone();
        out.lo = self.lo.max(b);
        out.description = format!("{} | x>{b}", self.description);
        out
    }

    /// `q·1_{x>0}` or `q·1_{x<0}`.
    pub fn restrict(&self, side: Side) -> Self {
        let mut out = self.clone();
        match side {
            Side::Right => {
                out.lo = self.lo.max(0.0);
                out.description = format!("{} | x>0", self.description);
            }
            Side::Left => {
                out.hi = self.hi.min(0.0);
                out.description = format!("{} | x<0", self.description);
            }
        }
        out
    }

    /// `q(· − dx)`.
    pub fn shifted(&self, dx: f64) -> Self {
        let mut out = self.clone();
        out.shift += dx;
        out.lo += dx;
        out.hi += dx;
        out.description = format!("{} shifted by {dx}", self.description);
        out
    }

    /// Points where `q` may be discontinuous or kinked, sorted, within support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        self.profile.breakpoints(&mut pts);
        let mut pts: Vec<f64> = pts.into_iter().map(|p| p + self.shift).collect();
        if self.lo.is_finite() {
            pts.push(self.lo);
        }
        if self.hi.is_finite() {
            pts.push(self.hi);
        }
        pts.retain(|&p| p >= self.lo && p <= self.hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    /// Smallest `X` with `∫_X^∞ (1+|x|)|q| < tail_tol`.
    pub fn right_cutoff(&self, tail_tol: f64) -> Result<f64> {
        self.cutoff(tail_tol, true)
    }

    /// Largest `X` with `∫_{−∞}^X (1+|x|)|q| < tail_tol`.
    pub fn left_cutoff(&self, tail_tol: f64) -> Result<f64> {
        self.cutoff(tail_tol, false)
    }

    fn cutoff(&self, tail_tol: f64, right: bool) -> Result<f64> {
        const CAP: f64 = 1.0e4;
        if self.is_zero() {
            return Ok(0.0);
        }
        let edge = if right { self.hi } else { self.lo };
        let bound = |x: f64| {
            let inside = if right { x < self.hi } else { x > self.lo };
            if !inside {
                0.0
            } else {
                // bounds are stated for the unshifted family
                self.profile.tail_bound(x - self.shift, right)
            }
        };
        let sgn = if right { 1.0 } else { -1.0 };
        let far = sgn * CAP;
        if edge.is_finite() && (edge - far) * sgn <= 0.0 {
            // support ends inside the cap: the tail past it is zero
            let mut lo = if right { self.lo.max(-CAP) } else { self.hi.min(CAP) };
            if !lo.is_finite() {
                lo = -far;
            }
            return Ok(bisect_cutoff(&bound, lo, edge, tail_tol, right));
        }
        if bound(far) >= tail_tol {
            let required = find_required(&bound, tail_tol, right);
            return Err(Error::TailNotConvergent { required, cap: CAP });
        }
        let start = if right {
            if self.lo.is_finite() { self.lo } else { -CAP }
        } else if self.hi.is_finite() {
            self.hi
        } else {
            CAP
        };
        Ok(bisect_cutoff(&bound, start, far, tail_tol, right))
    }

    /// Finite interval outside which the weighted tails are below `tail_tol`.
    pub fn effective_support(&self, tail_tol: f64) -> Result<(f64, f64)> {
        Ok((self.left_cutoff(tail_tol)?, self.right_cutoff(tail_tol)?))
    }

    /// `min q` over a sampling of the effective support (for search windows).
    pub fn sampled_min(&self, a: f64, b: f64, n: usize) -> f64 {
        (0..=n)
            .map(|i| self.evaluate(a + (b - a) * i as f64 / n as f64))
            .fold(0.0, f64::min)
    }

    /// Check the essential lower bound and the weighted decay at +∞.
    pub fn check_admissibility(
        &self,
        n_exponent: f64,
        scan_window: (f64, f64),
        a: f64,
        tolerance: f64,
    ) -> Result<AdmissibilityReport> {
        if !(n_exponent >= 0.0) {
            return Err(Error::InvalidInput(format!("N must be ≥ 0, got {n_exponent}")));
        }
        let (w0, w1) = scan_window;
        if !(w0.is_finite() && w1.is_finite() && w1 - w0 >= 1.0) {
            return Err(Error::InvalidInput(
                "scan window must be finite and at least one unit long".into(),
            ));
        }
        let lower_bound_sup = self.lower_bound_scan(w0, w1);
        let weighted_norm = self.weighted_norm(n_exponent, a, tolerance)?;
        Ok(AdmissibilityReport {
            lower_bound_sup,
            weighted_norm,
            n_exponent,
            passes: (
                lower_bound_sup.is_finite(),
                weighted_norm.is_finite() && n_exponent >= 2.5,
            ),
        })
    }

    /// Max over unit intervals `[c, c+1] ⊂ window`, `c` on a 0.01 grid, of
    /// `∫ max(−q, 0)`. Approximates the supremum over all unit intervals.
    pub fn lower_bound_scan(&self, w0: f64, w1: f64) -> f64 {
        const STEP: f64 = 0.01;
        let rule = GaussLegendre::<f64>::new(8);
        let cells = ((w1 - w0) / STEP).round() as usize;
        let bps = self.breakpoints();
        let neg = |x: f64| (-self.evaluate(x)).max(0.0);
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        for i in 0..cells {
            let a = w0 + i as f64 * STEP;
            let b = w0 + (i + 1) as f64 * STEP;
            let mut pts = vec![a];
            pts.extend(bps.iter().copied().filter(|&p| p > a && p < b));
            pts.push(b);
            let v = rule.integrate_panels(&pts, neg);
            cumulative.push(cumulative[i] + v);
        }
        let span = (1.0 / STEP).round() as usize;
        (0..=cells.saturating_sub(span))
            .map(|i| cumulative[i + span] - cumulative[i])
            .fold(0.0, f64::max)
    }

    /// `∫_a^∞ (1+|x|)^N |q(x)| dx` by adaptive quadrature on a compactified axis.
    pub fn weighted_norm(&self, n_exponent: f64, a: f64, tolerance: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let start = a.max(self.lo);
        if start >= self.hi {
            return Ok(0.0);
        }
        let f = |x: f64| (1.0 + x.abs()).powf(n_exponent) * self.evaluate(x).abs();
        if self.hi.is_finite() {
            let mut pts = vec![start];
            pts.extend(self.breakpoints().into_iter().filter(|&p| p > start && p < self.hi));
            pts.push(self.hi);
            return adaptive(f, &pts, tolerance, tolerance, 4000).map(|r| r.value);
        }
        // doubling windows [start + 2^k − 1, start + 2^{k+1} − 1]
        let bps = self.breakpoints();
        let floor = self
            .right_cutoff(tolerance)
            .unwrap_or(start)
            .max(bps.last().copied().unwrap_or(start));
        let mut total = 0.0;
        let mut a0 = start;
        let mut width = 1.0;
        for _ in 0..48 {
            let b0 = start + 2.0 * width - 1.0;
            let mut pts = vec![a0];
            pts.extend(bps.iter().copied().filter(|&p| p > a0 && p < b0));
            pts.push(b0);
            let piece = adaptive(f, &pts, 0.1 * tolerance, tolerance, 4000)?.value;
            total += piece;
            if piece <= tolerance * total.abs().max(1.0) && a0 > start + 1.0 && a0 >= floor {
                return Ok(total);
            }
            a0 = b0;
            width *= 2.0;
        }
        Err(Error::QuadratureNotConverged {
            partial: total,
            estimate: f64::INFINITY,
            tolerance,
        })
    }
}

fn validate(p: &Profile) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
    match p {
        Profile::SechWell { width, .. } | Profile::Gaussian { width, .. } if !(*width > 0.0) => {
            bad("width must be positive")
        }
        Profile::SquareWell { left, right, .. } if !(right > left) => {
            bad("square well needs left < right")
        }
        Profile::PowerTail { power, .. } if !(*power > 0.0) => bad("power must be positive"),
        Profile::LeftOscillatory { frequency, .. } if !frequency.is_finite() => {
            bad("frequency must be finite")
        }
        Profile::Sampled { xs, values } => {
            if xs.len() < 2 || xs.len() != values.len() {
                return bad("sampled profile needs ≥ 2 points and equal column lengths");
            }
            if xs.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("sampled abscissae must be strictly increasing");
            }
            if values.iter().chain(xs).any(|v| !v.is_finite()) {
                return bad("sampled profile must be finite");
            }
            Ok(())
        }
        Profile::Sum { parts } => parts.iter().try_for_each(validate),
        _ => Ok(()),
    }
}

fn bisect_cutoff<F: Fn(f64) -> f64>(bound: &F, inner: f64, outer: f64, tol: f64, right: bool) -> f64 {
    // bound is monotone: large towards `inner`, below tol at `outer`
    if bound(inner) < tol {
        return inner;
    }
    let (mut a, mut b) = (inner, outer);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if bound(m) < tol {
            b = m;
        } else {
            a = m;
        }
        if (b - a).abs() < 1e-9 * (1.0 + b.abs()) {
            break;
        }
    }
    let _ = right;
    b
}

fn find_required<F: Fn(f64) -> f64>(bound: &F, tol: f64, right: bool) -> f64 {
    let sgn = if right { 1.0 } else { -1.0 };
    let mut x = 1.0e4;
    for _ in 0..60 {
        if bound(sgn * x) < tol {
            return sgn * x;
        }
        x *= 4.0;
    }
    sgn * f64::INFINITY
}

/// Output of [`Potential::check_admissibility`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// Scanned sup over unit intervals of `∫ max(−q, 0)`.
    pub lower_bound_sup: f64,
    /// `∫_a^∞ (1+|x|)^N |q|`.
    pub weighted_norm: f64,
    pub n_exponent: f64,
    /// (bounded below, decays at the required rate with `N ≥ 5/2`).
    pub passes: (bool, bool),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        assert_eq!(Potential::zero().evaluate(3.7), 0.0);
        assert_eq!(Potential::sech_well(-2.0, 1.0, 0.0).evaluate(0.0), -2.0);
        assert_eq!(Potential::square_well(-1.0, 0.0, 2.0).evaluate(1.0), -1.0);
        assert_eq!(Potential::square_well(-1.0, 0.0, 2.0).evaluate(2.5), 0.0);
    }

    #[test]
    fn truncation_and_restriction() {
        let q = Potential::sech_well(-2.0, 1.0, 0.0);
        let qb = q.truncate_left(-10.0);
        assert_eq!(qb.evaluate(-10.0), 0.0);
        assert_eq!(qb.evaluate(-10.5), 0.0);
        assert_eq!(qb.evaluate(-9.5), q.evaluate(-9.5));
        assert!(Potential::zero().truncate_left(-3.0).is_zero());

        let shifted = Potential::sech_well(-2.0, 1.0, 5.0);
        let right = shifted.restrict(Side::Right);
        assert_eq!(right.evaluate(5.0), -2.0);
        assert_eq!(right.evaluate(-0.1), 0.0);
        for x in [-3.0, -0.2, 0.7, 4.0] {
            let total = q.restrict(Side::Left).evaluate(x) + q.restrict(Side::Right).evaluate(x);
            assert_eq!(total, q.evaluate(x));
        }
        let rhs_only = Potential::square_well(-1.0, 0.5, 2.0);
        assert!(rhs_only.restrict(Side::Left).is_zero());
    }

    #[test]
    fn sampled_requires_increasing_abscissae() {
        assert!(Potential::sampled(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        let q = Potential::sampled(vec![0.0, 1.0, 2.0], vec![0.0, -1.0, 0.0]).unwrap();
        assert!((q.evaluate(0.5) + 0.5).abs() < 1e-15);
        assert_eq!(q.evaluate(2.5), 0.0);
    }

    #[test]
    fn two_column_ingest() {
        let text = "# x q\n0 0\n1 -1 # peak\n\n2 0\n";
        let q = Potential::from_two_column(text).unwrap();
        assert!((q.evaluate(1.0) + 1.0).abs() < 1e-15);
        assert!(Potential::from_two_column("0 1 2\n").is_err());
    }

    #[test]
    fn cutoffs() {
        let q = Potential::sech_well(-2.0, 1.0, 0.0);
        let r = q.right_cutoff(1e-12).unwrap();
        assert!(r > 10.0 && r < 20.0, "{r}");
        let l = q.left_cutoff(1e-12).unwrap();
        assert!((l + r).abs() < 1e-6);
        let sq = Potential::square_well(-1.0, 0.0, 2.0);
        assert_eq!(sq.right_cutoff(1e-12).unwrap(), 2.0);
        assert_eq!(sq.left_cutoff(1e-12).unwrap(), 0.0);
        assert!(matches!(
            Potential::power_tail(1.0, 2.5).right_cutoff(1e-12),
            Err(Error::TailNotConvergent { .. })
        ));
        assert!(Potential::left_oscillatory(1.0, 2.0, -1.0).left_cutoff(1e-12).is_err());
        let trunc = Potential::left_oscillatory(1.0, 2.0, -1.0).truncate_left(-7.0);
        assert_eq!(trunc.left_cutoff(1e-12).unwrap(), -7.0);
    }

    #[test]
    fn admissibility_of_zero() {
        let r = Potential::zero().check_admissibility(2.5, (-5.0, 5.0), 0.0, 1e-10).unwrap();
        assert_eq!(r.lower_bound_sup, 0.0);
        assert_eq!(r.weighted_norm, 0.0);
        assert_eq!(r.passes, (true, true));
    }

    #[test]
    fn weighted_norm_monotone_in_exponent() {
        let q = Potential::gaussian(-1.0, 1.0, 2.0);
        let mut last = 0.0;
        for n in [0.0, 1.0, 2.5, 4.0] {
            let v = q.weighted_norm(n, -1.0, 1e-11).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn distant_bump_is_not_missed() {
        let q = Potential::gaussian(-1.0, 1.0, 60.0);
        let v = q.weighted_norm(0.0, 0.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn divergent_tail_reports_partial_value() {
        let q = Potential::power_tail(1.0, 2.0);
        assert!(matches!(
            q.weighted_norm(2.5, 0.0, 1e-10),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }
}
