"""Streaming separation components: reservoir, whitening, RSI control, ICA."""
