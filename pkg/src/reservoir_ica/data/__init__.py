"""Benchmark sources and mixing regimes."""
