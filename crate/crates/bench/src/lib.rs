//! Shared fixtures for the benchmarks.

use scbgd_core::problems::{BroydenTridiagonal, LiTridiagonal};
use scbgd_core::Problem;

pub const DIMS: [usize; 3] = [200, 600, 1000];

pub fn benchmark_problems(n: usize) -> Vec<Box<dyn Problem>> {
    vec![
        Box::new(BroydenTridiagonal::new(n).expect("n >= 2")),
        Box::new(LiTridiagonal::new(n).expect("n >= 2")),
    ]
}
