"""Vocabulary and index tests."""
