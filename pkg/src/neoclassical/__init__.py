"""Generic-proxy inference toolkit."""
