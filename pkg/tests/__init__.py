"""Tests for fourphoton."""
