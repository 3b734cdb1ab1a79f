//! Shared inputs for the criterion benches.

use deuce::ServeProfile;

/// `(p_F, p_S)` pairs spanning strong, even and weak servers.
pub const PROFILES: [(f64, f64); 4] = [(0.696, 0.55), (0.608, 0.49), (0.5, 0.5), (0.35, 0.6)];

pub fn profiles() -> Vec<ServeProfile> {
    PROFILES
        .iter()
        .map(|&(f, s)| ServeProfile::new(f, s).expect("valid constant profile"))
        .collect()
}
