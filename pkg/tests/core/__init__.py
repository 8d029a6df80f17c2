"""Core configuration and exception tests."""
