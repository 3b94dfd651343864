"""Tests for bilinorm."""
