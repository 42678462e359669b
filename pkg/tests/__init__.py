"""Test suite for the gbbn package."""
