"""
Tests for the VaCoAl engine and the genealogy pipeline.

Run with ``python manage.py test``. Every randomised check draws from a
seeded ``numpy.random.default_rng`` so results are reproducible.
"""
