"""
Django project for the VaCoAl reasoning engine.

The project carries no web surface; it hosts settings, logging and the
``genealogy`` app whose management commands form the command-line pipeline.
"""
