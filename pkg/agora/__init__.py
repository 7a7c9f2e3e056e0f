"""
Agora asset ecosystem kernel
Asset catalog and matchmaking, compliant geo-distributed planning, metered
execution, payment splitting and escrow transfer behind one CLI.
"""

__version__ = "0.1.0"
