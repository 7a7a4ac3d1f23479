//! Manual throughput probe for the transform kernels. Ignored by default;
//! run with `cargo test --release -p gevlab-core --test perf_probe -- --ignored --nocapture`.

use std::time::Instant;

use gevlab_core::fft::{fft2, FftPlan, Scratch};

#[test]
#[ignore]
fn fft2_throughput() {
    for n in [128usize, 256, 512] {
        let plan = FftPlan::new(n);
        let mut scratch = Scratch::new(n);
        let mut re: Vec<f64> = (0..n * n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut im: Vec<f64> = (0..n * n).map(|i| (i as f64 * 0.11).cos()).collect();
        // warm up
        for _ in 0..10 {
            fft2(&plan, &mut re, &mut im, &mut scratch, false);
            fft2(&plan, &mut re, &mut im, &mut scratch, true);
        }
        let reps = (40_000_000 / (n * n)).max(10);
        let t0 = Instant::now();
        for _ in 0..reps {
            fft2(&plan, &mut re, &mut im, &mut scratch, false);
            fft2(&plan, &mut re, &mut im, &mut scratch, true);
        }
        let dt = t0.elapsed().as_secs_f64() / (2 * reps) as f64;
        println!("n={n:4}  {:8.1} us per 2D c2c  ({reps} reps)", dt * 1e6);
    }
}
