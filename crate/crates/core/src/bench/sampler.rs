use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

/// User plus system CPU time of this process, in seconds.
fn process_cpu_seconds() -> f64 {
    // SAFETY: getrusage only writes into the zeroed struct we pass.
    let usage = unsafe {
        let mut usage: libc::rusage = std::mem::zeroed();
        libc::getrusage(libc::RUSAGE_SELF, &mut usage);
        usage
    };
    let secs = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 * 1e-6;
    secs(usage.ru_utime) + secs(usage.ru_stime)
}

/// Background thread recording process CPU utilization, as a percentage of
/// all host cores, once per interval.
pub(crate) struct CpuSampler {
    stop: Arc<AtomicBool>,
    handle: JoinHandle<Vec<f64>>,
}

impl CpuSampler {
    pub fn start(interval: Duration, cores: usize) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let capacity = cores.max(1) as f64;
        let handle = std::thread::spawn(move || {
            let mut samples = Vec::new();
            let mut last = (Instant::now(), process_cpu_seconds());
            let mut take = |last: &mut (Instant, f64)| {
                let now = (Instant::now(), process_cpu_seconds());
                let wall = now.0.duration_since(last.0).as_secs_f64();
                if wall > 0.0 {
                    samples.push(((now.1 - last.1) / wall / capacity * 100.0).clamp(0.0, 100.0));
                }
                *last = now;
            };
            loop {
                std::thread::park_timeout(interval);
                if flag.load(Ordering::Acquire) {
                    take(&mut last);
                    break;
                }
                if last.0.elapsed() >= interval {
                    take(&mut last);
                }
            }
            samples
        });
        CpuSampler { stop, handle }
    }

    /// Stops sampling and returns the mean utilization.
    pub fn finish(self) -> f64 {
        self.stop.store(true, Ordering::Release);
        self.handle.thread().unpark();
        let samples = self.handle.join().unwrap_or_default();
        if samples.is_empty() {
            0.0
        } else {
            samples.iter().sum::<f64>() / samples.len() as f64
        }
    }
}
