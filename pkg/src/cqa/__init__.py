"""Certain answers for self-join-free Boolean queries under primary-key constraints."""
from .model import Atom, Composite, Compression, Edge, Instance, Query, QueryGraph, binary

__all__ = ["Atom", "Composite", "Compression", "Edge", "Instance", "Query", "QueryGraph", "binary"]
