"""Topology-aware differentially private decentralized SGD simulator."""

__version__ = "0.1.0"
