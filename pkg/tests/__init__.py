"""Tests for the repelling walks library."""
