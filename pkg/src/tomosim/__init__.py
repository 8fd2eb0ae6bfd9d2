"""Simulation of tomography-based quantum algorithms.

Subpackages and modules: ``statecore`` (states, bases, circuits, evolution),
``tomography``, ``observables``, ``fermions``, ``robustness``, ``polyfactor``,
``io`` (JSON formats) and ``cli``.
"""

__version__ = "0.1.0"
