"""Core modules: p-adic arithmetic, weights, coset data, Hecke matrices and slopes."""
