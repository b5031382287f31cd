/// Main reward term for a turn of `alpha` degrees at path distance `d`
/// (mm) after the previous sharp turn; `d = f64::INFINITY` when there is
/// none. `h` is the hatch spacing.
pub fn reward_main(alpha: f64, d: f64, h: f64) -> f64 {
    if alpha < 90.0 && d <= 3.0 * h * (1.0 + 1e-9) {
        -h / d
    } else {
        0.0
    }
}

/// 1 once a point has collided more than `threshold` times.
pub fn collision_penalty(n: u32, threshold: u32) -> f64 {
    if n > threshold {
        1.0
    } else {
        0.0
    }
}

pub fn isolated_penalty(isolated: bool) -> f64 {
    if isolated {
        1.0
    } else {
        0.0
    }
}

/// Reward of one step, split into its terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardBreakdown {
    pub main: f64,
    pub collision: f64,
    pub isolated: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.main - self.collision - self.isolated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 0.05;

    #[test]
    fn main_term_cases() {
        assert_eq!(reward_main(45.0, 2.0 * H, H), -0.5);
        assert_eq!(reward_main(90.0, H, H), 0.0);
        assert_eq!(reward_main(30.0, 4.0 * H, H), 0.0);
        assert_eq!(reward_main(30.0, f64::INFINITY, H), 0.0);
        assert_eq!(reward_main(10.0, 3.0 * H, H), -1.0 / 3.0);
    }

    #[test]
    fn penalty_boundaries() {
        assert_eq!(collision_penalty(4, 3), 1.0);
        assert_eq!(collision_penalty(3, 3), 0.0);
        assert_eq!(collision_penalty(0, 3), 0.0);
        assert_eq!(isolated_penalty(true), 1.0);
        assert_eq!(isolated_penalty(false), 0.0);
        let r = RewardBreakdown { main: 0.0, collision: 0.0, isolated: isolated_penalty(true) };
        assert_eq!(r.total(), -1.0);
    }
}
