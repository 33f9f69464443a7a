"""
Genealogy Django App

Wires the VaCoAl engine into a file-based pipeline driven by management
commands: ingest, purify, learn, trace, oracle, compare, analyze, sweep,
bounds and gen_dag.
"""
