//! The kicked accelerated particle map
//!
//! ```text
//! J'     = J + k sin(theta + J) + omega
//! theta' = theta + J                      (both mod 2 pi)
//! ```
//!
//! and a Newton solver for its periodic orbits. Orbits are searched on the
//! lift to the plane, where a period-`p` orbit with windings `(w_j, w_theta)`
//! satisfies `F^p(x) = x + 2 pi (w_j, w_theta)`. The J-winding fixes the
//! rotation number `w_j / p` and the acceleration `2 pi w_j / p - omega`.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;
/// Half-width of the band around `|trace| = 2` classified as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-8;
/// Allowed drift of `det D(F^p)` from 1 along a returned orbit.
pub const AREA_TOL: f64 = 1e-9;

const SINGULAR_TOL: f64 = 1e-13;
const MIN_STEP: f64 = 1.0 / 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapParams {
    pub k: f64,
    pub omega: f64,
}

impl MapParams {
    pub fn new(k: f64, omega: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidParams(format!(
                "k must be finite and >= 0, got {k}"
            )));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidParams(format!(
                "omega must be finite, got {omega}"
            )));
        }
        Ok(MapParams { k, omega })
    }
}

/// A point of the plane covering the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftedPoint {
    pub j: f64,
    pub theta: f64,
}

impl LiftedPoint {
    pub fn new(j: f64, theta: f64) -> Self {
        LiftedPoint { j, theta }
    }

    fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.j, self.theta)
    }

    fn from_vector(v: Vector2<f64>) -> Self {
        LiftedPoint {
            j: v[0],
            theta: v[1],
        }
    }
}

pub(crate) fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point of the torus, both coordinates in `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusPoint {
    j: f64,
    theta: f64,
}

impl TorusPoint {
    pub fn new(j: f64, theta: f64) -> Self {
        TorusPoint {
            j: wrap(j),
            theta: wrap(theta),
        }
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lift(&self) -> LiftedPoint {
        LiftedPoint::new(self.j, self.theta)
    }
}

impl From<LiftedPoint> for TorusPoint {
    fn from(x: LiftedPoint) -> Self {
        TorusPoint::new(x.j, x.theta)
    }
}

pub fn lift_step(x: LiftedPoint, params: &MapParams) -> LiftedPoint {
    let phase = x.theta + x.j;
    LiftedPoint {
        j: x.j + params.k * phase.sin() + params.omega,
        theta: phase,
    }
}

pub fn step(x: TorusPoint, params: &MapParams) -> TorusPoint {
    lift_step(x.lift(), params).into()
}

/// Derivative of [`lift_step`] with respect to `(J, theta)`.
pub fn jacobian_step(x: LiftedPoint, params: &MapParams) -> Matrix2<f64> {
    let kc = params.k * (x.theta + x.j).cos();
    Matrix2::new(1.0 + kc, kc, 1.0, 1.0)
}

/// `F^p(x)` on the lift together with `D F^p(x)`.
pub fn lift_iterate(x: LiftedPoint, params: &MapParams, p: usize) -> (LiftedPoint, Matrix2<f64>) {
    let mut y = x;
    let mut m = Matrix2::identity();
    for _ in 0..p {
        m = jacobian_step(y, params) * m;
        y = lift_step(y, params);
    }
    (y, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl Stability {
    pub fn classify(trace: f64) -> Self {
        let a = trace.abs();
        if (a - 2.0).abs() <= PARABOLIC_TOL {
            Stability::Parabolic
        } else if a < 2.0 {
            Stability::Elliptic
        } else {
            Stability::Hyperbolic
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Elliptic => "elliptic",
            Stability::Hyperbolic => "hyperbolic",
            Stability::Parabolic => "parabolic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("Newton iteration did not converge")]
    MaxIterations,
    #[error("D F^p - I is numerically singular")]
    SingularJacobian,
}

/// One period of a periodic orbit on the lift, base point first.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    pub points: Vec<LiftedPoint>,
    pub period: usize,
    pub w_j: i64,
    pub w_theta: i64,
    /// Sup norm of `F^p(x) - x - 2 pi (w_j, w_theta)` at the base point.
    pub residual: f64,
    /// Trace of `D F^p` at the base point.
    pub trace: f64,
    pub determinant: f64,
    pub stability: Stability,
}

impl PeriodicOrbit {
    /// `w_j / p` mod 1.
    pub fn rotation_number(&self) -> Rational {
        Rational::new(self.w_j, self.period as i64).expect("period is positive")
    }

    pub fn base(&self) -> LiftedPoint {
        self.points[0]
    }

    pub fn torus_points(&self) -> Vec<TorusPoint> {
        self.points.iter().map(|&x| x.into()).collect()
    }

    /// Serialisable record of the orbit at `params`.
    pub fn record(&self, params: &MapParams) -> OrbitRecord {
        OrbitRecord {
            k: params.k,
            omega: params.omega,
            p: self.period,
            w_j: self.w_j,
            w_theta: self.w_theta,
            points: self.points.iter().map(|x| [x.j, x.theta]).collect(),
            trace: self.trace,
            stability: self.stability,
            residual: self.residual,
            alpha: acceleration(self, params),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub k: f64,
    pub omega: f64,
    pub p: usize,
    #[serde(rename = "w_J")]
    pub w_j: i64,
    pub w_theta: i64,
    pub points: Vec<[f64; 2]>,
    pub trace: f64,
    pub stability: Stability,
    pub residual: f64,
    pub alpha: f64,
}

/// `2 pi w_j / p - omega`.
pub fn acceleration(orbit: &PeriodicOrbit, params: &MapParams) -> f64 {
    TAU * orbit.w_j as f64 / orbit.period as f64 - params.omega
}

fn sup(v: &Vector2<f64>) -> f64 {
    v[0].abs().max(v[1].abs())
}

struct Target {
    p: usize,
    shift: Vector2<f64>,
}

impl Target {
    fn new(p: usize, w_j: i64, w_theta: i64) -> Self {
        Target {
            p,
            shift: Vector2::new(TAU * w_j as f64, TAU * w_theta as f64),
        }
    }

    fn residual(&self, x: Vector2<f64>, params: &MapParams) -> (Vector2<f64>, Matrix2<f64>) {
        let (y, m) = lift_iterate(LiftedPoint::from_vector(x), params, self.p);
        (y.to_vector() - x - self.shift, m)
    }
}

fn newton(
    params: &MapParams,
    target: &Target,
    seed: Vector2<f64>,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<Vector2<f64>, SolveError> {
    let mut x = seed;
    let (mut g, mut m) = target.residual(x, params);
    for _ in 0..=max_iter {
        let norm = sup(&g);
        if !norm.is_finite() {
            return Err(SolveError::MaxIterations);
        }
        let a = m - Matrix2::identity();
        let det = a.determinant();
        if norm <= tol {
            // one extra step pushes the error to round-off
            if det.abs() > SINGULAR_TOL * (1.0 + a.norm_squared()) {
                if let Some(inv) = a.try_inverse() {
                    let polished = x - inv * g;
                    let (g2, _) = target.residual(polished, params);
                    if sup(&g2) <= norm {
                        return Ok(polished);
                    }
                }
            }
            return Ok(x);
        }
        if det.abs() <= SINGULAR_TOL * (1.0 + a.norm_squared()) {
            return Err(SolveError::SingularJacobian);
        }
        let delta = -(a.try_inverse().ok_or(SolveError::SingularJacobian)? * g);
        let mut t = 1.0;
        loop {
            let trial = x + delta * t;
            let (g_trial, m_trial) = target.residual(trial, params);
            if sup(&g_trial) < norm || t <= MIN_STEP {
                x = trial;
                g = g_trial;
                m = m_trial;
                break;
            }
            t *= 0.5;
        }
    }
    Err(SolveError::MaxIterations)
}

fn build_orbit(
    params: &MapParams,
    p: usize,
    w_j: i64,
    w_theta: i64,
    base: Vector2<f64>,
) -> PeriodicOrbit {
    let mut points = Vec::with_capacity(p);
    let mut y = LiftedPoint::from_vector(base);
    for _ in 0..p {
        points.push(y);
        y = lift_step(y, params);
    }
    let (g, m) = Target::new(p, w_j, w_theta).residual(base, params);
    let trace = m.trace();
    PeriodicOrbit {
        points,
        period: p,
        w_j,
        w_theta,
        residual: sup(&g),
        trace,
        determinant: m.determinant(),
        stability: Stability::classify(trace),
    }
}

fn torus_key(x: &LiftedPoint) -> (f64, f64) {
    (wrap(x.j), wrap(x.theta))
}

/// Solves `F^p(x) = x + 2 pi (w_j, w_theta)` by damped Newton from `seed`.
///
/// The returned orbit is rebased so that its base point is the orbit point
/// with the least `(J, theta)` on the torus, lying in `[0, 2 pi)^2`; `w_theta`
/// is adjusted to match.
pub fn find_periodic_orbit(
    params: &MapParams,
    p: usize,
    w_j: i64,
    w_theta: i64,
    seed: LiftedPoint,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<PeriodicOrbit, SolveError> {
    assert!(p >= 1, "period must be positive");
    assert!(tol > 0.0, "tolerance must be positive");
    let x = newton(
        params,
        &Target::new(p, w_j, w_theta),
        seed.to_vector(),
        tol,
        max_iter,
    )?;

    let raw = build_orbit(params, p, w_j, w_theta, x);
    let base = raw
        .points
        .iter()
        .min_by(|a, b| {
            torus_key(a)
                .partial_cmp(&torus_key(b))
                .unwrap_or(Ordering::Equal)
        })
        .copied()
        .expect("p >= 1");
    let (bj, bt) = torus_key(&base);
    let (end, _) = lift_iterate(LiftedPoint::new(bj, bt), params, p);
    let new_w_theta = ((end.theta - bt) / TAU).round() as i64;

    // re-converge from the rebased point so the residual refers to it
    let rebased = newton(
        params,
        &Target::new(p, w_j, new_w_theta),
        Vector2::new(bj, bt),
        tol,
        max_iter,
    )
    .unwrap_or(Vector2::new(bj, bt));
    let orbit = build_orbit(params, p, w_j, new_w_theta, rebased);
    if orbit.residual > tol || (orbit.determinant - 1.0).abs() > AREA_TOL {
        return Err(SolveError::MaxIterations);
    }
    Ok(orbit)
}

/// Range of theta-windings a period-`p` orbit with base `J` in `[0, 2 pi)` can
/// have. Each step moves `J` by between `omega - k` and `omega + k`, and the
/// theta displacement over a period is the sum of the `J` values along it.
pub fn theta_winding_range(params: &MapParams, p: usize) -> RangeInclusive<i64> {
    let s = (p * p.saturating_sub(1)) as f64 / 2.0;
    let lo = (params.omega - params.k) * s;
    let hi = TAU * p as f64 + (params.omega + params.k) * s;
    (lo / TAU).floor() as i64..=(hi / TAU).ceil() as i64
}

/// J-windings `w` with `w = q (mod p)` compatible with the kick bound: the
/// J displacement over a period lies in `[p (omega - k), p (omega + k)]`.
pub fn feasible_j_windings(params: &MapParams, p: usize, q: i64) -> Vec<i64> {
    let pf = p as f64;
    let lo = pf * (params.omega - params.k) / TAU;
    let hi = pf * (params.omega + params.k) / TAU;
    let p = p as i64;
    let first = lo.ceil() as i64;
    let offset = (q - first).rem_euclid(p);
    (first + offset..)
        .step_by(p as usize)
        .take_while(|&w| w as f64 <= hi)
        .collect()
}

fn seed_lattice(grid_n: usize) -> Vec<Vector2<f64>> {
    let h = TAU / grid_n as f64;
    (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| Vector2::new(i as f64 * h, j as f64 * h)))
        .collect()
}

fn torus_distance(a: &LiftedPoint, b: &LiftedPoint) -> f64 {
    let d = |x: f64, y: f64| {
        let r = wrap(x - y);
        r.min(TAU - r)
    };
    d(a.j, b.j).max(d(a.theta, b.theta))
}

/// Same point set on the torus, within `eps`.
pub fn same_orbit(a: &PeriodicOrbit, b: &PeriodicOrbit, eps: f64) -> bool {
    a.period == b.period
        && a.points
            .iter()
            .all(|x| b.points.iter().any(|y| torus_distance(x, y) <= eps))
}

fn dedup_orbits(orbits: Vec<PeriodicOrbit>, eps: f64) -> Vec<PeriodicOrbit> {
    let mut out: Vec<PeriodicOrbit> = Vec::new();
    for o in orbits {
        if !out.iter().any(|u| same_orbit(u, &o, eps)) {
            out.push(o);
        }
    }
    out.sort_by(|a, b| {
        torus_key(&a.base())
            .partial_cmp(&torus_key(&b.base()))
            .unwrap_or(Ordering::Equal)
    });
    out
}

/// Runs [`find_periodic_orbit`] from a `grid_n x grid_n` seed lattice on
/// `[0, 2 pi)^2` for every theta-winding in [`theta_winding_range`], and
/// returns the distinct orbits found, sorted by base point.
pub fn orbit_search_grid(
    params: &MapParams,
    p: usize,
    w_j: i64,
    grid_n: usize,
    tol: f64,
) -> Vec<PeriodicOrbit> {
    assert!(grid_n >= 1, "grid_n must be positive");
    let seeds = seed_lattice(grid_n);
    let jobs: Vec<(i64, Vector2<f64>)> = theta_winding_range(params, p)
        .flat_map(|wt| seeds.iter().map(move |s| (wt, *s)))
        .collect();
    let found: Vec<PeriodicOrbit> = jobs
        .par_iter()
        .filter_map(|&(wt, s)| {
            find_periodic_orbit(
                params,
                p,
                w_j,
                wt,
                LiftedPoint::from_vector(s),
                tol,
                DEFAULT_MAX_ITER,
            )
            .ok()
        })
        .collect();
    dedup_orbits(found, 10.0 * tol)
}

/// Sequential search that stops at the first elliptic orbit. Returns the most
/// stable orbit found: elliptic, then parabolic, then hyperbolic.
pub(crate) fn best_orbit(
    params: &MapParams,
    p: usize,
    w_js: &[i64],
    grid_n: usize,
    tol: f64,
) -> Option<PeriodicOrbit> {
    let seeds = seed_lattice(grid_n);
    let mut best: Option<PeriodicOrbit> = None;
    for &w_j in w_js {
        for wt in theta_winding_range(params, p) {
            for s in &seeds {
                let Ok(orbit) = find_periodic_orbit(
                    params,
                    p,
                    w_j,
                    wt,
                    LiftedPoint::from_vector(*s),
                    tol,
                    DEFAULT_MAX_ITER,
                ) else {
                    continue;
                };
                if orbit.stability == Stability::Elliptic {
                    return Some(orbit);
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        orbit.stability == Stability::Parabolic
                            && b.stability == Stability::Hyperbolic
                    }
                };
                if better {
                    best = Some(orbit);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(k: f64, omega: f64) -> MapParams {
        MapParams::new(k, omega).unwrap()
    }

    #[test]
    fn lift_step_examples() {
        let y = lift_step(LiftedPoint::new(PI, 0.0), &params(0.0, PI));
        assert_eq!((y.j, y.theta), (2.0 * PI, PI));
        let y = lift_step(LiftedPoint::new(0.0, PI / 2.0), &params(1.0, 0.0));
        assert_eq!((y.j, y.theta), (1.0, PI / 2.0));
    }

    #[test]
    fn step_examples() {
        let y = step(TorusPoint::new(PI, 0.0), &params(0.0, PI));
        assert_eq!((y.j(), y.theta()), (0.0, PI));
        let y = step(TorusPoint::new(2.0, 5.0), &params(0.0, 0.0));
        assert_eq!(y.j(), 2.0);
        assert!((y.theta() - (7.0 - TAU)).abs() < 1e-15);
        let y = step(TorusPoint::new(0.0, 0.0), &params(0.7, 7.0));
        assert!((y.j() - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(y.theta(), 0.0);
    }

    #[test]
    fn wrap_stays_in_range() {
        assert_eq!(wrap(-1e-18), 0.0);
        assert_eq!(wrap(TAU), 0.0);
        assert!((wrap(-0.5) - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        let m = jacobian_step(LiftedPoint::new(0.3, 1.1), &params(0.0, 0.4));
        assert_eq!(m, Matrix2::new(1.0, 0.0, 1.0, 1.0));
        let m = jacobian_step(LiftedPoint::new(0.3, 1.1), &params(0.7, 0.2));
        assert!((m.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(MapParams::new(-0.1, 0.0).is_err());
        assert!(MapParams::new(f64::NAN, 0.0).is_err());
        assert!(MapParams::new(0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn stability_classification() {
        assert_eq!(Stability::classify(0.0), Stability::Elliptic);
        assert_eq!(Stability::classify(-1.999), Stability::Elliptic);
        assert_eq!(Stability::classify(2.5), Stability::Hyperbolic);
        assert_eq!(Stability::classify(-2.5), Stability::Hyperbolic);
        assert_eq!(Stability::classify(2.0 + 5e-9), Stability::Parabolic);
        assert_eq!(Stability::classify(-2.0), Stability::Parabolic);
    }

    #[test]
    fn fixed_point_from_analytic_conditions() {
        let pr = params(0.5, 0.3);
        let orbit =
            find_periodic_orbit(&pr, 1, 0, 0, LiftedPoint::new(0.1, 5.5), DEFAULT_TOL, 50).unwrap();
        let x = orbit.base();
        assert!(x.j.abs() < 1e-12 || (x.j - TAU).abs() < 1e-12);
        assert!((x.theta.sin() + 0.6).abs() < 1e-12);
        assert!(orbit.residual <= DEFAULT_TOL);
        assert_eq!(orbit.rotation_number(), Rational::ZERO);
    }

    #[test]
    fn no_fixed_point_when_kick_too_weak() {
        let pr = params(0.05, 0.3);
        for w_j in -1..=1 {
            for s in seed_lattice(6) {
                let r = find_periodic_orbit(
                    &pr,
                    1,
                    w_j,
                    0,
                    LiftedPoint::from_vector(s),
                    DEFAULT_TOL,
                    50,
                );
                assert!(r.is_err());
            }
        }
    }

    #[test]
    fn grid_finds_both_fixed_points() {
        let pr = params(0.5, 0.3);
        let orbits = orbit_search_grid(&pr, 1, 0, 8, DEFAULT_TOL);
        assert_eq!(orbits.len(), 2, "{orbits:?}");
        let kinds: Vec<_> = orbits.iter().map(|o| o.stability).collect();
        assert!(kinds.contains(&Stability::Elliptic));
        assert!(kinds.contains(&Stability::Hyperbolic));
        for o in &orbits {
            assert!((o.trace - 2.0).abs() > 0.39 && (o.trace - 2.0).abs() < 0.41);
        }
    }

    #[test]
    fn grid_is_empty_for_unperturbed_irrational_drift() {
        let pr = params(0.0, 0.3);
        for p in 1..=5 {
            for w_j in 0..p as i64 {
                assert!(
                    orbit_search_grid(&pr, p, w_j, 4, DEFAULT_TOL).is_empty(),
                    "p={p} w_j={w_j}"
                );
            }
        }
    }

    #[test]
    fn acceleration_examples() {
        let mk = |p, w_j| PeriodicOrbit {
            points: vec![LiftedPoint::new(0.0, 0.0); p],
            period: p,
            w_j,
            w_theta: 0,
            residual: 0.0,
            trace: 0.0,
            determinant: 1.0,
            stability: Stability::Elliptic,
        };
        assert_eq!(acceleration(&mk(2, 1), &params(0.1, PI)), 0.0);
        assert_eq!(acceleration(&mk(1, 0), &params(0.1, 0.3)), -0.3);
        let a = acceleration(&mk(3, 1), &params(0.1, 2.0));
        assert!((a - (TAU / 3.0 - 2.0)).abs() < 1e-15);
        assert!((a - 0.0944).abs() < 1e-4);
    }

    #[test]
    fn feasible_windings() {
        assert_eq!(feasible_j_windings(&params(0.2, 0.1), 1, 0), vec![0]);
        assert!(feasible_j_windings(&params(0.05, 0.1), 1, 0).is_empty());
        assert_eq!(feasible_j_windings(&params(0.1, TAU - 0.05), 1, 0), vec![1]);
        assert_eq!(feasible_j_windings(&params(0.1, PI), 2, 1), vec![1]);
        assert!(feasible_j_windings(&params(0.1, PI), 2, 0).is_empty());
        assert_eq!(feasible_j_windings(&params(0.1, -0.05), 3, 0), vec![0]);
        assert!(feasible_j_windings(&params(0.1, -0.05), 3, 2).is_empty());
    }

    #[test]
    fn theta_range_covers_fixed_points() {
        assert_eq!(theta_winding_range(&params(0.5, 0.3), 1), 0..=1);
    }

    #[test]
    fn record_json_fields() {
        let pr = params(0.5, 0.3);
        let orbit = orbit_search_grid(&pr, 1, 0, 4, DEFAULT_TOL).remove(0);
        let v = serde_json::to_value(orbit.record(&pr)).unwrap();
        for key in [
            "k",
            "omega",
            "p",
            "w_J",
            "w_theta",
            "points",
            "trace",
            "stability",
            "residual",
            "alpha",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["points"].as_array().unwrap().len(), 1);
    }
}
