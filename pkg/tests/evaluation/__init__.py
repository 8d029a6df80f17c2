"""Evaluation tests."""
