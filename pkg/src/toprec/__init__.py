"""Exact genus-0 topological recursion."""
