"""invctl: a verification workbench for class invariants in a small
contract-equipped object-oriented language."""

__version__ = "0.1.0"
