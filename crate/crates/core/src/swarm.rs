//! Generalized Vicsek model on a periodic square, steered by a per-step
//! rotation schedule derived from an Archimedean spiral, plus the Gaussian
//! corruption used for denoising experiments.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::sub_rng;

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Distribution of the per-step orientation noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleNoise {
    /// Uniform on `[-ε/2, ε/2]`.
    Uniform,
    /// Normal with standard deviation `ε`.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub n_agents: usize,
    /// Points per trajectory, initial position included.
    pub steps: usize,
    pub radius: f64,
    pub speed: f64,
    pub angle_noise: f64,
    #[serde(default = "default_noise_kind")]
    pub noise_kind: AngleNoise,
    pub delta: f64,
    /// Side of the periodic square `[-side/2, side/2)²`.
    pub domain_side: f64,
    pub rng_seed: u64,
}

fn default_noise_kind() -> AngleNoise {
    AngleNoise::Uniform
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            n_agents: 30,
            steps: 201,
            radius: 2.0,
            speed: 0.05,
            angle_noise: 0.05,
            noise_kind: AngleNoise::Uniform,
            delta: 1.0,
            domain_side: 10.0,
            rng_seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 || self.steps == 0 {
            return Err(Error::Config("swarm: n_agents and steps must be positive".into()));
        }
        if !(self.radius > 0.0 && self.speed > 0.0 && self.delta > 0.0 && self.domain_side > 0.0)
            || self.angle_noise < 0.0
        {
            return Err(Error::Config(
                "swarm: radius, speed, delta, domain_side must be positive and angle_noise non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Wraps into `[-period/2, period/2)`.
fn wrap(v: f64, period: f64) -> f64 {
    let w = v - period * ((v + period / 2.0) / period).floor();
    // Guard the half-open upper end against rounding.
    if w >= period / 2.0 {
        w - period
    } else {
        w
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    wrap(theta, 2.0 * PI)
}

/// Squared distance under the minimum-image convention.
pub fn periodic_dist2(a: Vec2, b: Vec2, side: f64) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dx = dx - side * (dx / side).round();
    let dy = dy - side * (dy / side).round();
    dx * dx + dy * dy
}

pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

#[inline]
fn apply(r: &Mat2, v: Vec2) -> Vec2 {
    [r[0][0] * v[0] + r[0][1] * v[1], r[1][0] * v[0] + r[1][1] * v[1]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmFrame {
    pub positions: Vec<Vec2>,
    pub orientations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationSchedule {
    /// Chord angles `γ`, one per step.
    pub angles: Vec<f64>,
    /// Rotation by `-γ` for each step.
    pub matrices: Vec<Mat2>,
}

impl RotationSchedule {
    pub fn identity(steps: usize) -> Self {
        RotationSchedule {
            angles: vec![0.0; steps],
            matrices: vec![[[1.0, 0.0], [0.0, 1.0]]; steps],
        }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// Point `t` (one based) of the spiral that turns `3π` while its radius grows from 1 to 4.
pub fn spiral_point(t: usize, steps: usize) -> Vec2 {
    let tm1 = (t - 1) as f64;
    let r = 1.0 + 3.0 * tm1 / (steps - 1) as f64;
    let kappa = 3.0 * PI * tm1 / steps as f64;
    [r * kappa.cos(), r * kappa.sin()]
}

/// Rotation schedule from the chord directions of the spiral. The first step
/// has no preceding chord and reuses the second step's angle.
pub fn spiral_schedule(steps: usize) -> Result<RotationSchedule> {
    if steps < 2 {
        return Err(Error::Config("spiral schedule needs at least 2 steps".into()));
    }
    let mut angles = vec![0.0; steps];
    for t in 2..=steps {
        let c = spiral_point(t, steps);
        let prev = spiral_point(t - 1, steps);
        angles[t - 1] = (c[1] - prev[1]).atan2(c[0] - prev[0]);
    }
    angles[0] = angles[1];
    let matrices = angles.iter().map(|g| rotation(-g)).collect();
    Ok(RotationSchedule { angles, matrices })
}

/// Unit-speed displacement direction of an agent heading `theta` under `r`.
fn heading(r: &Mat2, theta: f64) -> Vec2 {
    apply(r, [theta.cos(), theta.sin()])
}

/// Advances the swarm by one step. `noise_draws[n]` is added to agent `n`'s
/// new orientation. An agent whose neighbourhood average is exactly the zero
/// vector keeps its orientation.
pub fn step_swarm(frame: &SwarmFrame, r: &Mat2, cfg: &SwarmConfig, noise_draws: &[f64]) -> SwarmFrame {
    let n = frame.positions.len();
    let r2 = cfg.radius * cfg.radius;
    let headings: Vec<Vec2> = frame.orientations.iter().map(|&th| heading(r, th)).collect();
    let mut positions = Vec::with_capacity(n);
    let mut orientations = Vec::with_capacity(n);
    for i in 0..n {
        let mut u = [0.0, 0.0];
        let mut count = 0usize;
        for j in 0..n {
            if periodic_dist2(frame.positions[i], frame.positions[j], cfg.domain_side) <= r2 {
                u[0] += headings[j][0];
                u[1] += headings[j][1];
                count += 1;
            }
        }
        u[0] /= count as f64;
        u[1] /= count as f64;
        let theta = if u == [0.0, 0.0] {
            frame.orientations[i]
        } else {
            wrap_angle(u[1].atan2(u[0]) + noise_draws[i])
        };
        orientations.push(theta);
        let step = cfg.speed * cfg.delta;
        let p = frame.positions[i];
        positions.push([
            wrap(p[0] + step * headings[i][0], cfg.domain_side),
            wrap(p[1] + step * headings[i][1], cfg.domain_side),
        ]);
    }
    SwarmFrame {
        positions,
        orientations,
    }
}

/// Per-agent trajectories, each a list of points.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub trajectories: Vec<Vec<Vec2>>,
}

impl TrajectorySet {
    pub fn n_agents(&self) -> usize {
        self.trajectories.len()
    }

    pub fn steps(&self) -> usize {
        self.trajectories.first().map_or(0, |t| t.len())
    }

    pub fn to_matrices(&self) -> Vec<Array2<f64>> {
        self.trajectories
            .iter()
            .map(|tr| Array2::from_shape_fn((tr.len(), 2), |(t, d)| tr[t][d]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmRun {
    /// Unwrapped positions: cumulative displacement without periodic re-wrapping.
    pub trajectories: TrajectorySet,
    /// Wrapped frames, one per point.
    pub frames: Vec<SwarmFrame>,
}

pub fn initial_frame(cfg: &SwarmConfig) -> SwarmFrame {
    let mut rng = sub_rng(cfg.rng_seed, 0);
    let half = cfg.domain_side / 2.0;
    let positions = (0..cfg.n_agents)
        .map(|_| [rng.gen_range(-half..half), rng.gen_range(-half..half)])
        .collect();
    let orientations = (0..cfg.n_agents).map(|_| rng.gen_range(-PI..PI)).collect();
    SwarmFrame {
        positions,
        orientations,
    }
}

pub fn simulate_swarm(cfg: &SwarmConfig, schedule: &RotationSchedule) -> Result<SwarmRun> {
    cfg.validate()?;
    if schedule.len() < cfg.steps {
        return Err(Error::Config(format!(
            "schedule has {} steps, simulation needs {}",
            schedule.len(),
            cfg.steps
        )));
    }
    let mut noise_rng = sub_rng(cfg.rng_seed, 1);
    let normal = Normal::new(0.0, cfg.angle_noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut draw = || match cfg.noise_kind {
        AngleNoise::Uniform if cfg.angle_noise > 0.0 => {
            noise_rng.gen_range(-cfg.angle_noise / 2.0..=cfg.angle_noise / 2.0)
        }
        AngleNoise::Gaussian if cfg.angle_noise > 0.0 => normal.sample(&mut noise_rng),
        _ => 0.0,
    };

    let mut frame = initial_frame(cfg);
    let mut unwrapped: Vec<Vec<Vec2>> = frame.positions.iter().map(|&p| vec![p]).collect();
    let mut frames = vec![frame.clone()];
    let step = cfg.speed * cfg.delta;
    for t in 0..cfg.steps - 1 {
        let r = &schedule.matrices[t];
        let noise: Vec<f64> = (0..cfg.n_agents).map(|_| draw()).collect();
        for (tr, &theta) in unwrapped.iter_mut().zip(&frame.orientations) {
            let h = heading(r, theta);
            let last = *tr.last().expect("non-empty");
            tr.push([last[0] + step * h[0], last[1] + step * h[1]]);
        }
        frame = step_swarm(&frame, r, cfg, &noise);
        frames.push(frame.clone());
    }
    Ok(SwarmRun {
        trajectories: TrajectorySet {
            trajectories: unwrapped,
        },
        frames,
    })
}

/// Copy of `traj` with i.i.d. `N(0, sigma²)` added to every coordinate.
pub fn add_noise(traj: &TrajectorySet, sigma: f64, seed: u64) -> Result<TrajectorySet> {
    if !(sigma >= 0.0) {
        return Err(Error::Config(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(traj.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = sub_rng(seed, 2);
    let trajectories = traj
        .trajectories
        .iter()
        .map(|tr| {
            tr.iter()
                .map(|p| [p[0] + normal.sample(&mut rng), p[1] + normal.sample(&mut rng)])
                .collect()
        })
        .collect();
    Ok(TrajectorySet { trajectories })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(n: usize) -> SwarmConfig {
        SwarmConfig {
            n_agents: n,
            angle_noise: 0.0,
            ..SwarmConfig::default()
        }
    }

    #[test]
    fn wrapping_ranges() {
        for v in [-7.0, -5.0, 0.0, 4.999, 5.0, 12.3] {
            let w = wrap(v, 10.0);
            assert!((-5.0..5.0).contains(&w), "{v} -> {w}");
        }
        assert_eq!(wrap_angle(PI), -PI);
        assert!((periodic_dist2([-4.9, 0.0], [4.9, 0.0], 10.0) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn spiral_endpoints() {
        let t = 201;
        assert_eq!(spiral_point(1, t), [1.0, 0.0]);
        let end = spiral_point(t, t);
        assert!(((end[0].powi(2) + end[1].powi(2)).sqrt() - 4.0).abs() < 1e-12);
        let s = spiral_schedule(t).unwrap();
        assert_eq!(s.len(), t);
        assert_eq!(s.angles[0], s.angles[1]);
        assert!(spiral_schedule(1).is_err());
    }

    #[test]
    fn second_angle_is_first_chord() {
        let t = 201.0;
        let (r2, k2) = (1.0 + 3.0 / (t - 1.0), 3.0 * PI / t);
        let want = (r2 * k2.sin() - 0.0).atan2(r2 * k2.cos() - 1.0);
        let s = spiral_schedule(201).unwrap();
        assert!((s.angles[1] - want).abs() <= 1e-12);
    }

    #[test]
    fn aligned_flock_keeps_heading() {
        let cfg = quiet(4);
        let theta = 0.7;
        let frame = SwarmFrame {
            positions: vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.3, 0.3]],
            orientations: vec![theta; 4],
        };
        let next = step_swarm(&frame, &rotation(0.0), &cfg, &[0.0; 4]);
        for (p, q) in frame.positions.iter().zip(&next.positions) {
            assert!((q[0] - p[0] - 0.05 * theta.cos()).abs() < 1e-12);
            assert!((q[1] - p[1] - 0.05 * theta.sin()).abs() < 1e-12);
        }
        for th in next.orientations {
            assert!((th - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_averages_headings() {
        let cfg = quiet(2);
        let frame = SwarmFrame {
            positions: vec![[0.0, 0.0], [1.0, 0.0]],
            orientations: vec![0.0, PI / 2.0],
        };
        let next = step_swarm(&frame, &rotation(0.0), &cfg, &[0.0; 2]);
        for th in next.orientations {
            assert!((th - PI / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simulation_shape_and_determinism() {
        let cfg = SwarmConfig { rng_seed: 4, ..SwarmConfig::default() };
        let sched = spiral_schedule(cfg.steps).unwrap();
        let a = simulate_swarm(&cfg, &sched).unwrap();
        let b = simulate_swarm(&cfg, &sched).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectories.n_agents(), 30);
        assert_eq!(a.trajectories.steps(), 201);
        assert_eq!(a.frames.len(), 201);
        let short = RotationSchedule::identity(10);
        assert!(simulate_swarm(&cfg, &short).is_err());
    }

    #[test]
    fn lone_agent_moves_straight() {
        let cfg = SwarmConfig { n_agents: 1, steps: 50, angle_noise: 0.0, ..SwarmConfig::default() };
        let run = simulate_swarm(&cfg, &RotationSchedule::identity(50)).unwrap();
        let tr = &run.trajectories.trajectories[0];
        let th = run.frames[0].orientations[0];
        for w in tr.windows(2) {
            assert!((w[1][0] - w[0][0] - 0.05 * th.cos()).abs() < 1e-12);
            assert!((w[1][1] - w[0][1] - 0.05 * th.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sigma_noise_is_copy() {
        let cfg = SwarmConfig { n_agents: 3, steps: 5, ..SwarmConfig::default() };
        let run = simulate_swarm(&cfg, &RotationSchedule::identity(5)).unwrap();
        assert_eq!(add_noise(&run.trajectories, 0.0, 1).unwrap(), run.trajectories);
        assert!(add_noise(&run.trajectories, -1.0, 1).is_err());
    }
}
