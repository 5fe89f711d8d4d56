"""Cat-production schemes."""
