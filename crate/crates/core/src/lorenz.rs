//! True and mis-specified Lorenz systems, a fixed-step integrator, and the
//! paired dataset generator used for orbit correction.
//!
//! A corrupted point is produced by taking a point of a true orbit as the
//! initial condition of the mis-specified system and integrating it for `eta`
//! steps; the last state is the corrupted counterpart.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::sub_rng;

pub type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    /// Integration step in time units.
    pub delta: f64,
    pub steps: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            sigma: 3.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            delta: 0.01,
            steps: 5000,
        }
    }
}

impl LorenzParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || self.steps == 0 {
            return Err(Error::Config("lorenz: delta must be > 0 and steps >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Euler,
}

/// `(σ(y₂−y₁), y₁(ρ−y₃)−y₂, y₁y₂−βy₃)`.
///
/// The middle component is the standard Lorenz form; the printed source of
/// this experiment writes `ρ − x₃` there, which is read as a typo for `ρ − y₃`.
pub fn true_derivative(y: State, p: &LorenzParams) -> State {
    [
        p.sigma * (y[1] - y[0]),
        y[0] * (p.rho - y[2]) - y[1],
        y[0] * y[1] - p.beta * y[2],
    ]
}

/// The formulation error: the `−x₂` damping term of the middle equation is dropped.
pub fn erroneous_derivative(x: State, p: &LorenzParams) -> State {
    [
        p.sigma * (x[1] - x[0]),
        x[0] * (p.rho - x[2]),
        x[0] * x[1] - p.beta * x[2],
    ]
}

#[inline]
fn axpy(y: State, a: f64, k: State) -> State {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]]
}

/// One step of size `h` from `y`.
pub fn step(field: impl Fn(State) -> State, y: State, h: f64, integrator: Integrator) -> State {
    match integrator {
        Integrator::Euler => axpy(y, h, field(y)),
        Integrator::Rk4 => {
            let k1 = field(y);
            let k2 = field(axpy(y, h / 2.0, k1));
            let k3 = field(axpy(y, h / 2.0, k2));
            let k4 = field(axpy(y, h, k3));
            [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            ]
        }
    }
}

/// A sampled trajectory; row 0 is the initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<State>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rows `from..` as an `n × 3` matrix.
    pub fn to_matrix_from(&self, from: usize) -> Array2<f64> {
        let rows = &self.points[from..];
        Array2::from_shape_fn((rows.len(), 3), |(t, d)| rows[t][d])
    }

    pub fn to_matrix(&self) -> Array2<f64> {
        self.to_matrix_from(0)
    }
}

fn advance(
    field: &impl Fn(State) -> State,
    y0: State,
    delta: f64,
    steps: usize,
    integrator: Integrator,
) -> Result<State> {
    let mut y = y0;
    for s in 1..=steps {
        y = step(field, y, delta, integrator);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: s });
        }
    }
    Ok(y)
}

/// Integrates `field` from `y0` for `p.steps` steps of size `p.delta`.
pub fn integrate(
    field: impl Fn(State) -> State,
    y0: State,
    p: &LorenzParams,
    integrator: Integrator,
) -> Result<Orbit> {
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { step: 0 });
    }
    let mut points = Vec::with_capacity(p.steps + 1);
    points.push(y0);
    let mut y = y0;
    for s in 1..=p.steps {
        y = step(&field, y, p.delta, integrator);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: s });
        }
        points.push(y);
    }
    Ok(Orbit { points })
}

/// Pushes every point of `orbit` through `eta` steps of the mis-specified system.
pub fn corrupt_orbit(orbit: &Orbit, eta: usize, p: &LorenzParams, integrator: Integrator) -> Result<Orbit> {
    if eta >= p.steps.max(1) && eta > 0 {
        return Err(Error::Config(format!("eta = {eta} must be below steps = {}", p.steps)));
    }
    let field = |x: State| erroneous_derivative(x, p);
    let points = orbit
        .points
        .iter()
        .map(|&y| advance(&field, y, p.delta, eta, integrator))
        .collect::<Result<Vec<_>>>()?;
    Ok(Orbit { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorenzDataset {
    pub true_orbits: Vec<Orbit>,
    pub erroneous_orbits: Vec<Orbit>,
}

/// Initial condition of orbit `index`, uniform on `[-15, 15]³`.
pub fn initial_condition(seed: u64, index: usize) -> State {
    let mut rng = sub_rng(seed, index as u64);
    [
        rng.gen_range(-15.0..=15.0),
        rng.gen_range(-15.0..=15.0),
        rng.gen_range(-15.0..=15.0),
    ]
}

pub fn generate_dataset(
    n_orbits: usize,
    eta: usize,
    p: &LorenzParams,
    integrator: Integrator,
    seed: u64,
) -> Result<LorenzDataset> {
    p.validate()?;
    if n_orbits == 0 {
        return Err(Error::Config("n_orbits must be at least 1".into()));
    }
    let mut true_orbits = Vec::with_capacity(n_orbits);
    let mut erroneous_orbits = Vec::with_capacity(n_orbits);
    for n in 0..n_orbits {
        let y0 = initial_condition(seed, n);
        let orbit = integrate(|y| true_derivative(y, p), y0, p, integrator)?;
        erroneous_orbits.push(corrupt_orbit(&orbit, eta, p, integrator)?);
        true_orbits.push(orbit);
    }
    Ok(LorenzDataset {
        true_orbits,
        erroneous_orbits,
    })
}

/// Mean Euclidean distance between corresponding points of two orbits.
pub fn mean_displacement(a: &Orbit, b: &Orbit) -> f64 {
    let s: f64 = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(x, y)| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt())
        .sum();
    s / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> LorenzParams {
        LorenzParams::default()
    }

    #[test]
    fn true_field_examples() {
        let p = reference();
        assert_eq!(true_derivative([0.0; 3], &p), [0.0; 3]);
        let e = 72f64.sqrt();
        let d = true_derivative([e, e, 27.0], &p);
        assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
        let d = true_derivative([1.0, 2.0, 3.0], &p);
        assert!((d[0] - 3.0).abs() < 1e-12 && (d[1] - 23.0).abs() < 1e-12 && (d[2] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn erroneous_field_examples() {
        let p = reference();
        assert_eq!(erroneous_derivative([0.0; 3], &p), [0.0; 3]);
        let d = erroneous_derivative([1.0, 2.0, 3.0], &p);
        assert!((d[0] - 3.0).abs() < 1e-12 && (d[1] - 25.0).abs() < 1e-12 && (d[2] + 6.0).abs() < 1e-12);
        assert_eq!(erroneous_derivative([0.0, 0.0, 5.0], &p)[0], 0.0);
    }

    #[test]
    fn equilibria_are_fixed() {
        let p = LorenzParams { steps: 100, ..reference() };
        let orbit = integrate(|y| true_derivative(y, &p), [0.0; 3], &p, Integrator::Rk4).unwrap();
        assert!(orbit.points.iter().all(|y| *y == [0.0; 3]));
        let e = (p.beta * (p.rho - 1.0)).sqrt();
        for eq in [[e, e, p.rho - 1.0], [-e, -e, p.rho - 1.0]] {
            let orbit = integrate(|y| true_derivative(y, &p), eq, &p, Integrator::Rk4).unwrap();
            assert_eq!(orbit.len(), 101);
            for y in &orbit.points {
                for d in 0..3 {
                    assert!((y[d] - eq[d]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn rk4_single_step_matches_hand_rolled() {
        let p = LorenzParams { steps: 1, ..reference() };
        let orbit = integrate(|y| true_derivative(y, &p), [1.0, 1.0, 1.0], &p, Integrator::Rk4).unwrap();
        // Hand-rolled classic RK4 with explicit stage arithmetic.
        let f = |x: f64, y: f64, z: f64| (3.0 * (y - x), x * (28.0 - z) - y, x * y - 8.0 / 3.0 * z);
        let h = 0.01;
        let (a1, b1, c1) = f(1.0, 1.0, 1.0);
        let (a2, b2, c2) = f(1.0 + h / 2.0 * a1, 1.0 + h / 2.0 * b1, 1.0 + h / 2.0 * c1);
        let (a3, b3, c3) = f(1.0 + h / 2.0 * a2, 1.0 + h / 2.0 * b2, 1.0 + h / 2.0 * c2);
        let (a4, b4, c4) = f(1.0 + h * a3, 1.0 + h * b3, 1.0 + h * c3);
        let want = [
            1.0 + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0,
            1.0 + h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0,
            1.0 + h * (c1 + 2.0 * c2 + 2.0 * c3 + c4) / 6.0,
        ];
        for d in 0..3 {
            assert!((orbit.points[1][d] - want[d]).abs() <= 1e-12);
        }
    }

    #[test]
    fn corruption_examples() {
        let p = LorenzParams { steps: 50, ..reference() };
        let orbit = integrate(|y| true_derivative(y, &p), [1.0, 1.0, 1.0], &p, Integrator::Rk4).unwrap();
        assert_eq!(corrupt_orbit(&orbit, 0, &p, Integrator::Rk4).unwrap(), orbit);

        let origin = Orbit { points: vec![[0.0; 3]; 4] };
        assert_eq!(corrupt_orbit(&origin, 7, &p, Integrator::Rk4).unwrap(), origin);

        let single = Orbit { points: vec![[1.0, 1.0, 1.0]] };
        let c = corrupt_orbit(&single, 1, &p, Integrator::Rk4).unwrap();
        let want = step(|x| erroneous_derivative(x, &p), [1.0, 1.0, 1.0], 0.01, Integrator::Rk4);
        for d in 0..3 {
            assert!((c.points[0][d] - want[d]).abs() <= 1e-12);
        }
        assert!(corrupt_orbit(&orbit, 50, &p, Integrator::Rk4).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let p = LorenzParams { steps: 10, delta: 1.0, ..reference() };
        let r = integrate(|y| [y[0] * y[0] * 1e200, 0.0, 0.0], [1.0, 0.0, 0.0], &p, Integrator::Euler);
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }

    #[test]
    fn dataset_determinism_and_zero_eta() {
        let p = LorenzParams { steps: 30, ..reference() };
        let a = generate_dataset(2, 0, &p, Integrator::Rk4, 5).unwrap();
        let b = generate_dataset(2, 0, &p, Integrator::Rk4, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.true_orbits, a.erroneous_orbits);
        assert_ne!(a.true_orbits[0], a.true_orbits[1]);
        for o in &a.true_orbits {
            assert!(o.points[0].iter().all(|v| (-15.0..=15.0).contains(v)));
        }
    }
}
