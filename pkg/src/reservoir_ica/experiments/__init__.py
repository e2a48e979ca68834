"""Experiment configuration, presets and the multi-seed runner."""
