"""Exact-arithmetic engine for second-homology certificates of the
special automorphism groups of free groups, with coefficients in the
abelianization and its dual (over the integers with 2 inverted)."""

__version__ = "0.1.0"
