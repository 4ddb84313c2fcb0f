//! Sliding-window bandit over the policy set.
//!
//! Each episode runs one arm. Over the last `L` episodes an arm scores its
//! mean return plus its mean exploration ratio; arms absent from the window
//! are tried first.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::policy::pick_uniform;

pub const DEFAULT_WINDOW: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetaError {
    #[error("arm {arm} has no episodes in the window")]
    NoRecords { arm: usize },
    #[error("exploration ratio {0} outside [0, 1]")]
    BadRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub arm: usize,
    pub episode_return: f64,
    /// Fraction of the episode's steps flagged exploratory.
    pub exploration_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmStats {
    pub count: usize,
    pub mean_return: f64,
    pub bonus: f64,
}

#[derive(Debug, Clone)]
pub struct ArmWindow {
    length: usize,
    records: VecDeque<EpisodeRecord>,
    /// Rescale windowed returns to [0, 1] before scoring. Off by default.
    pub normalize_returns: bool,
}

impl ArmWindow {
    pub fn new(length: usize) -> Self {
        assert!(length > 0, "window length must be positive");
        Self { length, records: VecDeque::with_capacity(length), normalize_returns: false }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &EpisodeRecord> {
        self.records.iter()
    }

    pub fn record(&mut self, rec: EpisodeRecord) -> Result<(), MetaError> {
        if !(0.0..=1.0).contains(&rec.exploration_ratio) {
            return Err(MetaError::BadRatio(rec.exploration_ratio));
        }
        if self.records.len() == self.length {
            self.records.pop_front();
        }
        self.records.push_back(rec);
        Ok(())
    }

    pub fn count(&self, arm: usize) -> usize {
        self.records.iter().filter(|r| r.arm == arm).count()
    }

    pub fn arm_counts(&self, num_arms: usize) -> Vec<usize> {
        let mut counts = vec![0; num_arms];
        for r in &self.records {
            if r.arm < num_arms {
                counts[r.arm] += 1;
            }
        }
        counts
    }

    /// Mean exploration ratio of `arm` within the window.
    pub fn bonus(&self, arm: usize) -> Result<f64, MetaError> {
        let stats = self.stats(arm + 1)[arm];
        if stats.count == 0 {
            Err(MetaError::NoRecords { arm })
        } else {
            Ok(stats.bonus)
        }
    }

    pub fn mean_return(&self, arm: usize) -> Result<f64, MetaError> {
        let stats = self.stats(arm + 1)[arm];
        if stats.count == 0 {
            Err(MetaError::NoRecords { arm })
        } else {
            Ok(stats.mean_return)
        }
    }

    /// Per-arm window statistics. Arms without records report zeros.
    pub fn stats(&self, num_arms: usize) -> Vec<ArmStats> {
        let (lo, hi) = if self.normalize_returns {
            self.records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.episode_return), hi.max(r.episode_return))
            })
        } else {
            (0.0, 1.0)
        };
        let scale = |g: f64| {
            if !self.normalize_returns {
                g
            } else if hi > lo {
                (g - lo) / (hi - lo)
            } else {
                0.0
            }
        };
        let mut out = vec![ArmStats::default(); num_arms];
        for r in &self.records {
            if let Some(s) = out.get_mut(r.arm) {
                s.count += 1;
                s.mean_return += scale(r.episode_return);
                s.bonus += r.exploration_ratio;
            }
        }
        for s in &mut out {
            if s.count > 0 {
                s.mean_return /= s.count as f64;
                s.bonus /= s.count as f64;
            }
        }
        out
    }

    /// Picks the next arm: a uniformly chosen unrepresented arm if any,
    /// otherwise the best `mean return + bonus` with uniform tie-break.
    pub fn select<R: Rng + ?Sized>(&self, num_arms: usize, rng: &mut R) -> usize {
        assert!(num_arms > 0);
        let stats = self.stats(num_arms);
        let unseen: Vec<usize> = (0..num_arms).filter(|&i| stats[i].count == 0).collect();
        if !unseen.is_empty() {
            return pick_uniform(&unseen, rng);
        }
        let scores: Vec<f64> = stats.iter().map(|s| s.mean_return + s.bonus).collect();
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best: Vec<usize> = (0..num_arms).filter(|&i| scores[i] == top).collect();
        pick_uniform(&best, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rec(arm: usize, g: f64, ratio: f64) -> EpisodeRecord {
        EpisodeRecord { arm, episode_return: g, exploration_ratio: ratio }
    }

    #[test]
    fn cold_start_and_missing_arm() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = ArmWindow::new(10);
        assert!(w.select(13, &mut rng) < 13);
        let mut w = ArmWindow::new(10);
        for arm in [0, 1, 2, 4] {
            w.record(rec(arm, 100.0, 1.0)).unwrap();
        }
        assert_eq!(w.select(5, &mut rng), 3);
    }

    #[test]
    fn score_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut w = ArmWindow::new(10);
        w.record(rec(0, 1.0, 0.0)).unwrap();
        w.record(rec(1, 0.5, 0.4)).unwrap();
        let s = w.stats(2);
        assert_eq!(s[0].mean_return + s[0].bonus, 1.0);
        assert!((s[1].mean_return + s[1].bonus - 0.9).abs() < 1e-12);
        assert_eq!(w.select(2, &mut rng), 0);
    }

    #[test]
    fn window_evicts_oldest() {
        let mut w = ArmWindow::new(2);
        w.record(rec(0, 1.0, 0.0)).unwrap();
        w.record(rec(1, 1.0, 0.0)).unwrap();
        w.record(rec(1, 1.0, 0.0)).unwrap();
        assert_eq!(w.count(0), 0);
        assert_eq!(w.count(1), 2);
        assert_eq!(ArmWindow::new(DEFAULT_WINDOW).length(), 1000);
    }

    #[test]
    fn bonus_is_mean_ratio() {
        let mut w = ArmWindow::new(1000);
        w.record(rec(0, 0.0, 0.2)).unwrap();
        w.record(rec(0, 0.0, 0.4)).unwrap();
        w.record(rec(1, 0.0, 1.0)).unwrap();
        assert!((w.bonus(0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(w.bonus(1).unwrap(), 1.0);
        assert_eq!(w.bonus(2), Err(MetaError::NoRecords { arm: 2 }));
        let mut w = ArmWindow::new(1000);
        for _ in 0..1000 {
            w.record(rec(0, 0.0, 0.0)).unwrap();
        }
        assert_eq!(w.bonus(0).unwrap(), 0.0);
        assert!(w.record(rec(0, 0.0, 1.5)).is_err());
    }

    #[test]
    fn normalized_returns_lie_in_unit_interval() {
        let mut w = ArmWindow::new(10);
        w.normalize_returns = true;
        w.record(rec(0, -5.0, 0.0)).unwrap();
        w.record(rec(1, 15.0, 0.0)).unwrap();
        let s = w.stats(2);
        assert_eq!((s[0].mean_return, s[1].mean_return), (0.0, 1.0));
    }
}
