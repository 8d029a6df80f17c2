"""CLI utility tests."""
