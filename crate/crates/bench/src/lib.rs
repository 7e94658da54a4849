//! Benchmark harness for the ball kernels.
