"""Matrix and vector file storage."""
