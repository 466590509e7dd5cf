//! Fixed 15 s windows every 10 s, the proposal baseline.

use vmr_core::proposals::{sliding_windows, DEFAULT_STRIDE_S, DEFAULT_WINDOW_S};

fn main() -> vmr_core::Result<()> {
    for duration in [12.0, 35.0, 30.5, 150.0] {
        let windows = sliding_windows(duration, DEFAULT_WINDOW_S, DEFAULT_STRIDE_S)?;
        let shown: Vec<String> = windows.iter().map(|w| format!("[{}, {}]", w.start(), w.end())).collect();
        println!("{duration:>5} s -> {} windows: {}", windows.len(), shown.join(" "));
    }
    Ok(())
}
