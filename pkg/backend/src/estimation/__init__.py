"""Precision-matrix estimation."""
