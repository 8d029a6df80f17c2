"""Corpus ingestion tests."""
