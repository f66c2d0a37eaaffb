//! Observation channels: the walk seen through additive Gaussian noise or
//! through a pure delay.

use std::fmt;

/// Which observation process is in effect. The two are never combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    /// `Y_t = X_t + epsilon * (W_1 + ... + W_t)`.
    Noisy { epsilon: f64 },
    /// `Y_t = 0` for `t <= delay`, `Y_t = X_{t-delay}` afterwards.
    Delayed { delay: u64 },
}

impl ChannelKind {
    /// True when the channel reproduces the latent path exactly.
    pub fn is_identity(&self) -> bool {
        match *self {
            ChannelKind::Noisy { epsilon } => epsilon == 0.0,
            ChannelKind::Delayed { delay } => delay == 0,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Noisy { epsilon } => write!(f, "noisy(epsilon={epsilon})"),
            ChannelKind::Delayed { delay } => write!(f, "delayed(d={delay})"),
        }
    }
}

/// Noisy observation of `x_t`, given the running noise sum `W_1 + ... + W_t`.
#[inline]
pub fn noisy_observe(x_t: f64, noise_acc: f64, epsilon: f64) -> f64 {
    x_t + epsilon * noise_acc
}

/// The delay line could not supply `X_{t-d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("delay line holds X_{oldest}..=X_{newest}, cannot supply Y_{t} = X_{{{t}-{delay}}}")]
pub struct DelayUnderrun {
    pub t: u64,
    pub delay: u64,
    pub oldest: u64,
    pub newest: u64,
}

/// Ring buffer over the last `delay + 1` values of the latent walk.
///
/// Values are pushed in step order starting with `X_0`.
#[derive(Debug, Clone)]
pub struct DelayLine {
    delay: u64,
    ring: Vec<f64>,
    // Number of values pushed so far; the newest held value is X_{len-1}.
    len: u64,
}

impl DelayLine {
    pub fn new(delay: u64) -> Self {
        let slots = usize::try_from(delay).expect("delay exceeds address space") + 1;
        Self {
            delay,
            ring: vec![0.0; slots],
            len: 0,
        }
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    /// Record the next latent value `X_t`, where `t` is the number of values
    /// pushed before this one.
    #[inline]
    pub fn push(&mut self, x: f64) {
        let slot = (self.len % self.ring.len() as u64) as usize;
        self.ring[slot] = x;
        self.len += 1;
    }

    /// `Y_t` of the delay channel.
    pub fn observe(&self, t: u64) -> Result<f64, DelayUnderrun> {
        delayed_observe(self, t)
    }
}

/// `Y_t = 0` for `t <= d`, else `X_{t-d}` read from the ring buffer.
pub fn delayed_observe(line: &DelayLine, t: u64) -> Result<f64, DelayUnderrun> {
    if t <= line.delay {
        return Ok(0.0);
    }
    let wanted = t - line.delay;
    let capacity = line.ring.len() as u64;
    let newest = line.len.checked_sub(1);
    let oldest = line.len.saturating_sub(capacity);
    match newest {
        Some(newest) if wanted >= oldest && wanted <= newest => {
            Ok(line.ring[(wanted % capacity) as usize])
        }
        _ => Err(DelayUnderrun {
            t,
            delay: line.delay,
            oldest,
            newest: newest.unwrap_or(0),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialStreams;

    #[test]
    fn zero_noise_is_identity() {
        assert_eq!(noisy_observe(3.25, -17.0, 0.0), 3.25);
        assert!(ChannelKind::Noisy { epsilon: 0.0 }.is_identity());
        assert!(ChannelKind::Delayed { delay: 0 }.is_identity());
    }

    #[test]
    fn noisy_arithmetic() {
        assert_eq!(noisy_observe(5.0, -2.0, 0.5), 4.0);
    }

    #[test]
    fn prefix_is_zero() {
        let mut line = DelayLine::new(3);
        for x in [0.0, 1.0, 2.0, 3.0] {
            line.push(x);
        }
        for t in 0..=3 {
            assert_eq!(line.observe(t).unwrap(), 0.0);
        }
        assert_eq!(line.observe(4).unwrap(), 1.0);
    }

    #[test]
    fn zero_delay_is_identity() {
        let mut line = DelayLine::new(0);
        for t in 0..=7u64 {
            line.push(t as f64 * 1.5);
            assert_eq!(line.observe(t).unwrap(), t as f64 * 1.5);
        }
    }

    #[test]
    fn matches_stored_path() {
        let mut streams = TrialStreams::for_trial(9, 0, 0);
        for d in [1u64, 2, 5, 13] {
            let mut path = vec![0.0];
            let mut line = DelayLine::new(d);
            line.push(0.0);
            for t in 1..200u64 {
                let x = path[t as usize - 1] + 0.3 + streams.increment();
                path.push(x);
                line.push(x);
                let expected = if t <= d { 0.0 } else { path[(t - d) as usize] };
                assert_eq!(line.observe(t).unwrap(), expected, "t={t} d={d}");
            }
        }
    }

    #[test]
    fn stale_reads_fail() {
        let mut line = DelayLine::new(2);
        for t in 0..10 {
            line.push(t as f64);
        }
        // holds X_7..=X_9
        assert_eq!(line.observe(11).unwrap(), 9.0);
        assert!(line.observe(12).is_err());
        assert!(line.observe(8).is_err());
    }
}
