"""Trace and extension machinery for BV functions on discretized planar domains."""
