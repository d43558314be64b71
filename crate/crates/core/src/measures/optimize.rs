//! Two-stage search over qubit projective measurements: a fixed
//! `(theta, phi)` grid followed by Nelder-Mead refinement from the best
//! grid points.

use std::f64::consts::PI;

use super::QubitMeasurement;

pub const GRID_THETA: usize = 32;
pub const GRID_PHI: usize = 64;
/// Number of grid minima used as refinement seeds.
pub const REFINE_STARTS: usize = 3;
/// Refinement stops once the simplex values agree to this level.
pub const REFINE_TOLERANCE: f64 = 1e-6;
const REFINE_MAX_ITERATIONS: usize = 200;

fn grid_point(i: usize, j: usize) -> QubitMeasurement {
    QubitMeasurement::new(
        PI * i as f64 / (GRID_THETA - 1) as f64,
        2.0 * PI * j as f64 / GRID_PHI as f64,
    )
}

/// Minimizes `objective` over rank-1 projective qubit measurements.
///
/// The objective must be symmetric under relabelling the two outcomes,
/// i.e. under the antipodal map `(theta, phi) -> (pi - theta, phi + pi)`.
/// With the grid sizes above that map sends grid points to grid points, so
/// only the upper hemisphere (and a single point per pole) is evaluated.
/// Ties are broken by the lowest grid index; the result is deterministic.
pub fn optimize_measurement<F>(mut objective: F) -> (QubitMeasurement, f64)
where
    F: FnMut(&QubitMeasurement) -> f64,
{
    let mut evaluated: Vec<(f64, usize, QubitMeasurement)> = Vec::with_capacity(GRID_THETA * GRID_PHI / 2);
    for i in 0..GRID_THETA / 2 {
        // Every phi at theta = 0 is the same point.
        let phis = if i == 0 { 1 } else { GRID_PHI };
        for j in 0..phis {
            let m = grid_point(i, j);
            let value = objective(&m);
            evaluated.push((sanitize(value), i * GRID_PHI + j, m));
        }
    }
    evaluated.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let (mut best_value, _, mut best) = evaluated[0];
    let step = PI / (GRID_THETA - 1) as f64;
    for &(_, _, start) in evaluated.iter().take(REFINE_STARTS) {
        let (m, value) = nelder_mead(&mut objective, start, step);
        if value < best_value {
            best_value = value;
            best = m;
        }
    }
    (best.canonical(), best_value)
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn nelder_mead<F>(objective: &mut F, start: QubitMeasurement, step: f64) -> (QubitMeasurement, f64)
where
    F: FnMut(&QubitMeasurement) -> f64,
{
    let mut eval = |p: [f64; 2]| sanitize(objective(&QubitMeasurement::new(p[0], p[1])));
    let origin = [start.theta, start.phi];
    let mut simplex = [
        origin,
        [origin[0] + step, origin[1]],
        [origin[0], origin[1] + step],
    ];
    let mut values = simplex.map(&mut eval);

    for _ in 0..REFINE_MAX_ITERATIONS {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        if values[2] - values[0] < REFINE_TOLERANCE {
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };

        let reflected = along(-1.0);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = eval(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                // Shrink toward the best vertex.
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = eval(simplex[k]);
                }
            }
        }
    }

    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (QubitMeasurement::new(simplex[best][0], simplex[best][1]), values[best])
}
