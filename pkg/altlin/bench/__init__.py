"""
Benchmark harness: experiment configs, runner and command-line entry point
"""
