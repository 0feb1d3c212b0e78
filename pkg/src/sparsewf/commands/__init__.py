"""
Command modules for the sparsewf CLI
"""

from .figures import FiguresCommand
from .oracles import OraclesCommand
from .rate import RateCommand
from .recover import RecoverCommand
from .selftest import SelftestCommand
from .sweep import SweepCommand

__all__ = [
    "FiguresCommand",
    "OraclesCommand",
    "RateCommand",
    "RecoverCommand",
    "SelftestCommand",
    "SweepCommand",
]
