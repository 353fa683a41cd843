use super::params::DriverParams;

/// IDM acceleration, clamped to `[-3 b, a_max]`.
///
/// `gap` is the bumper-to-bumper distance to the leader (`f64::INFINITY` on a
/// free road) and `dv = v - v_leader`.
pub fn idm_acceleration(p: &DriverParams, v: f64, v_desired: f64, gap: f64, dv: f64) -> f64 {
    let free = if v_desired > 0.0 {
        (v / v_desired).powf(p.delta)
    } else {
        1.0
    };
    let interaction = if gap.is_finite() {
        let s_star = p.s0 + (v * p.headway + v * dv / (2.0 * (p.a_max * p.b_comfort).sqrt())).max(0.0);
        let r = s_star / gap.max(1e-6);
        r * r
    } else {
        0.0
    };
    (p.a_max * (1.0 - free - interaction)).clamp(-3.0 * p.b_comfort, p.a_max)
}

/// Equilibrium gap at speed `v` (`v < v_desired`).
pub fn equilibrium_gap(p: &DriverParams, v: f64, v_desired: f64) -> f64 {
    (p.s0 + v * p.headway) / (1.0 - (v / v_desired).powf(p.delta)).sqrt()
}

/// Steady speed at the given gap, by bisection on the equilibrium gap
/// equation.
pub fn equilibrium_speed(p: &DriverParams, gap: f64, v_desired: f64) -> f64 {
    if gap <= p.s0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, v_desired);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if equilibrium_gap(p, mid, v_desired) < gap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equilibrium flow per lane (veh/h) at density `rho` (veh/km/lane).
pub fn equilibrium_flow(p: &DriverParams, rho: f64, v_desired: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let spacing = 1000.0 / rho;
    let gap = spacing - p.length;
    rho * equilibrium_speed(p, gap, v_desired) * 3.6
}
