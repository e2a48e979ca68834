"""Separation metrics, offline baselines and seed aggregation."""
