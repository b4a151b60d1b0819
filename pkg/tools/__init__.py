"""Standalone helper scripts."""
