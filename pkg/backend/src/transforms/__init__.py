"""Matrix-argument integral transforms."""
