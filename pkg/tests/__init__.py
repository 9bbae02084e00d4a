"""Tests for the tense_logic package."""
