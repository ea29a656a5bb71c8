use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Manual clock for tests: `sleep` advances time instantly.
#[derive(Default)]
pub struct MockClock {
    now: Mutex<Duration>,
    slept: Mutex<Vec<Duration>>,
}

impl MockClock {
    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }

    /// Every duration passed to `sleep`, in call order.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.slept.lock().unwrap().clone()
    }
}

impl Clock for MockClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.slept.lock().unwrap().push(d);
        self.advance(d);
    }
}

pub const RATE_WINDOW: Duration = Duration::from_secs(60);

/// At most `limit` acquisitions in any 60 s window.
pub struct RateLimiter {
    limit: usize,
    clock: Arc<dyn Clock>,
    stamps: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(per_minute: u32, clock: Arc<dyn Clock>) -> Self {
        Self {
            limit: per_minute.max(1) as usize,
            clock,
            stamps: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks until a request may go out and records it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut stamps = self.stamps.lock().unwrap();
                let now = self.clock.now();
                while stamps.front().is_some_and(|t| now.saturating_sub(*t) >= RATE_WINDOW) {
                    stamps.pop_front();
                }
                if stamps.len() < self.limit {
                    stamps.push_back(now);
                    return;
                }
                (stamps[0] + RATE_WINDOW).saturating_sub(now)
            };
            self.clock.sleep(wait.max(Duration::from_millis(1)));
        }
    }
}
