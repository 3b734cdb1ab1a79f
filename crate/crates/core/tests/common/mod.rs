#![allow(dead_code)]

use deuce::{ServeProfile, ServeSchedule};

/// Brute-force reference: plays the schedule point by point over the full
/// score space (deuce folded back onto 3:3, 4:3, 3:4) for `max_points`
/// points, with no geometric-series closure. Mass still in play afterwards is
/// returned as `leftover`.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub win: f64,
    pub bp_prob: f64,
    pub expected_points: f64,
    pub expected_bps: f64,
    pub leftover: f64,
}

pub fn forward_oracle(sched: &ServeSchedule, prof: &ServeProfile, max_points: usize) -> Oracle {
    // state: (f, s, bp_seen) with f, s in 0..=4 after folding.
    let idx = |f: usize, s: usize, seen: bool| (f * 5 + s) * 2 + seen as usize;
    let mut mass = vec![0.0f64; 50];
    if sched.is_deuce_only() {
        mass[idx(3, 3, false)] = 1.0;
    } else {
        mass[idx(0, 0, false)] = 1.0;
    }
    let (mut win, mut bp1, mut len, mut bps) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..max_points {
        let p = prof.resolve(sched.source_at(k));
        let mut next = vec![0.0f64; 50];
        for f in 0..5 {
            for s in 0..5 {
                for seen in [false, true] {
                    let m = mass[idx(f, s, seen)];
                    if m == 0.0 {
                        continue;
                    }
                    for (df, ds, pr) in [(1, 0, p), (0, 1, 1.0 - p)] {
                        let w = m * pr;
                        if w == 0.0 {
                            continue;
                        }
                        let (mut f2, mut s2) = (f + df, s + ds);
                        if f2 >= 4 && f2 >= s2 + 2 {
                            win += w;
                            len += (k + 1) as f64 * w;
                            continue;
                        }
                        if s2 >= 4 && s2 >= f2 + 2 {
                            len += (k + 1) as f64 * w;
                            continue;
                        }
                        if f2 == 4 && s2 == 4 {
                            f2 = 3;
                            s2 = 3;
                        }
                        let is_bp = s2 >= 3 && s2 > f2;
                        if is_bp {
                            bps += w;
                            if !seen {
                                bp1 += w;
                            }
                        }
                        next[idx(f2, s2, seen || is_bp)] += w;
                    }
                }
            }
        }
        mass = next;
    }
    Oracle {
        win,
        bp_prob: bp1,
        expected_points: len,
        expected_bps: bps,
        leftover: mass.iter().sum(),
    }
}

pub fn prof(p_f: f64, p_s: f64) -> ServeProfile {
    ServeProfile::new(p_f, p_s).unwrap()
}

/// 0.01, 0.02, ..., 0.99
pub fn grid99() -> impl Iterator<Item = f64> + Clone {
    (1..=99).map(|i| i as f64 / 100.0)
}
