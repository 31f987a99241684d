"""Test package for rd_lasso."""
