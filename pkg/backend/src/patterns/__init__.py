"""
Design Patterns Implementation

Modules are imported directly (``from src.patterns.observer import ...``);
the strategies and the facade depend on the numerics modules, which in turn
use the observer.
"""
