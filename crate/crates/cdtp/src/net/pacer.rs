//! Egress pacing for real-socket transports.
//!
//! Loopback experiments emulate a slow access link (the paper's wireless
//! modem) by serializing every outgoing byte through a shared pacer: a
//! send of `n` bytes departs `n / rate` after the previous send finished.
//! Unlike a token bucket with a deep burst allowance, this preserves the
//! back-to-back dispersion that packet-pair measurement depends on.

use std::sync::Mutex;
use std::time::{Duration, Instant};

pub struct Pacer {
    bytes_per_sec: u64,
    next_free: Mutex<Instant>,
}

impl Pacer {
    pub fn new(bits_per_sec: u64) -> Self {
        assert!(bits_per_sec >= 8, "rate below one byte per second");
        Pacer {
            bytes_per_sec: bits_per_sec / 8,
            next_free: Mutex::new(Instant::now()),
        }
    }

    pub fn bits_per_sec(&self) -> u64 {
        self.bytes_per_sec * 8
    }

    fn serialization(&self, len: usize) -> Duration {
        Duration::from_nanos((len as u64 * 1_000_000_000).div_ceil(self.bytes_per_sec))
    }

    /// Block until `len` bytes have "left the link", then return.
    pub fn send(&self, len: usize) {
        let done = {
            let mut next = self.next_free.lock().unwrap();
            let start = (*next).max(Instant::now());
            let done = start + self.serialization(len);
            *next = done;
            done
        };
        let now = Instant::now();
        if done > now {
            std::thread::sleep(done - now);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paced_sends_take_serialization_time() {
        let pacer = Pacer::new(8_000_000); // 1 MB/s
        let start = Instant::now();
        for _ in 0..10 {
            pacer.send(10_000);
        }
        let elapsed = start.elapsed();
        // 100 kB at 1 MB/s = 100 ms
        assert!(elapsed >= Duration::from_millis(95), "elapsed {elapsed:?}");
        assert!(elapsed < Duration::from_millis(400), "elapsed {elapsed:?}");
    }

    #[test]
    fn idle_pacer_does_not_accumulate_burst() {
        let pacer = Pacer::new(800_000); // 100 kB/s
        std::thread::sleep(Duration::from_millis(50));
        let start = Instant::now();
        pacer.send(5_000); // 50 ms of serialization
        assert!(start.elapsed() >= Duration::from_millis(45));
    }
}
