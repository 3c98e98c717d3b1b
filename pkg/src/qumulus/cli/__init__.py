"""Command-line driver: circuit/result files, jobs, demos and benchmarks."""
