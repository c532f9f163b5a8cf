"""Modular forms on Gamma0(N) with character: spaces, Hecke theory, expansions at cusps."""
