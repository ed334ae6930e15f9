"""pwbench: a password-security workbench for defenders.

Fits guessing models to password-frequency data, derives lockout limits
for a target attack-success threshold, models guessing attacks and their
mitigations as attack-defence trees, and compiles password composition
policies from a small DSL into checkers.
"""

__version__ = "0.1.0"
