use rand::Rng;

/// Sample an entry lane: weight of lane `i` is `(1/(1+density_i)) * bias^i`,
/// lane 0 being the rightmost. `allowed` masks out lanes (all allowed when
/// empty). `None` when no lane is allowed.
pub fn choose_lane_on_entry<R: Rng + ?Sized>(densities: &[f64], allowed: &[bool], bias: f64, rng: &mut R) -> Option<usize> {
    let weights: Vec<f64> = densities
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if allowed.is_empty() || allowed[i] {
                bias.powi(i as i32) / (1.0 + d)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let candidates = weights.iter().filter(|&&w| w > 0.0).count();
    if candidates == 1 {
        return weights.iter().position(|&w| w > 0.0);
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            if u < *w {
                return Some(i);
            }
            u -= w;
        }
    }
    weights.iter().rposition(|&w| w > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Right,
    Straight,
    Left,
}

/// Turn from heading `h_in` to `h_out` (radians) with a dead band of
/// `threshold` radians around straight.
pub fn classify_turn(h_in: f64, h_out: f64, threshold: f64) -> Turn {
    use std::f64::consts::PI;
    let mut d = (h_out - h_in).rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    if d > threshold {
        Turn::Left
    } else if d < -threshold {
        Turn::Right
    } else {
        Turn::Straight
    }
}

/// Lane a turn must be taken from, if any.
pub fn turn_lane(turn: Turn, lanes: u8) -> Option<u8> {
    match turn {
        Turn::Right => Some(0),
        Turn::Left => Some(lanes - 1),
        Turn::Straight => None,
    }
}
