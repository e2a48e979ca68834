"""Test suite for THORChain Fee Analysis."""
