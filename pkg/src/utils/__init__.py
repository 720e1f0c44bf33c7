"""Shared utilities: configuration, errors, logging, seeding and output."""
