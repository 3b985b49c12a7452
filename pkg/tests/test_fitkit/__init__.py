"""Tests for the fitting toolkit."""
