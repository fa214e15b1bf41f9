"""Config resolution and the two-fold (pre-train, re-train) procedure."""
