"""Simulation of qubit-to-qubit teleportation through a shared resonator."""
