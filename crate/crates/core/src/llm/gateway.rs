use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use super::{LlmError, LlmProvider, LlmResponse, PromptBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Extra attempts after the first, for transient errors only.
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self { max_retries: 0, ..Self::default() }
    }

    fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Shareable front for a provider: bounds concurrent requests, retries
/// transient failures and counts calls.
pub struct Gateway {
    provider: Arc<dyn LlmProvider>,
    retry: RetryPolicy,
    max_parallel: usize,
    in_flight: Mutex<usize>,
    slot_free: Condvar,
    calls: AtomicU64,
    attempts: AtomicU64,
}

struct Permit<'a>(&'a Gateway);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.slot_free.notify_one();
    }
}

impl Gateway {
    pub fn new(provider: Arc<dyn LlmProvider>) -> Self {
        Self {
            provider,
            retry: RetryPolicy::default(),
            max_parallel: 4,
            in_flight: Mutex::new(0),
            slot_free: Condvar::new(),
            calls: AtomicU64::new(0),
            attempts: AtomicU64::new(0),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_parallel(mut self, n: usize) -> Self {
        self.max_parallel = n.max(1);
        self
    }

    pub fn provider(&self) -> &dyn LlmProvider {
        self.provider.as_ref()
    }

    pub fn supports_images(&self) -> bool {
        self.provider.supports_images()
    }

    /// Completed or failed logical requests, not counting retries.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn attempts(&self) -> u64 {
        self.attempts.load(Ordering::SeqCst)
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.max_parallel {
            n = self.slot_free.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit(self)
    }

    /// Raw completion text for `bundle`.
    pub fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if !bundle.attachments.is_empty() && !self.provider.supports_images() {
            return Err(LlmError::Capability { provider: self.provider.name().to_string() });
        }
        let _permit = self.acquire();
        let mut attempt = 0;
        loop {
            self.attempts.fetch_add(1, Ordering::SeqCst);
            match self.provider.complete(bundle) {
                Err(e) if e.is_transient() && attempt < self.retry.max_retries => {
                    std::thread::sleep(self.retry.delay(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    /// Completion parsed with the bundle's marker protocol.
    pub fn ask(&self, bundle: &PromptBundle) -> Result<LlmResponse, LlmError> {
        let raw = self.complete(bundle)?;
        Ok(LlmResponse::parse(&raw, &bundle.markers))
    }
}
