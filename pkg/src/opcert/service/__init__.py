"""FastAPI service wrapping the certification engines."""
