"""Symbolic-numeric workbench for generalized functions.

Layers: exact gauge-series numbers (gauge), formal distributions over
open boxes (formal), a finite dyadic sheaf engine (sheaf), mollified
embeddings into an algebra of parameterized nets (nets, gsf), and
randomized verification of the structural laws tying them together
(universal).  The command-line front end lives in cli.
"""

__version__ = "0.1.0"
