"""
Base command class for all CLI commands.
"""

from abc import ABC, abstractmethod
from argparse import ArgumentParser, Namespace


class Command(ABC):
    """
    Abstract base class for all commands. Subclasses in `sparsewf.commands`
    are discovered automatically.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """
        The subcommand name (e.g. 'recover', 'sweep').
        """
        pass

    @property
    @abstractmethod
    def help(self) -> str:
        """
        Short help text shown in the command list.
        """
        pass

    @abstractmethod
    def add_arguments(self, parser: ArgumentParser) -> None:
        """
        Add command-specific arguments to the subcommand parser.
        """
        pass

    @abstractmethod
    def execute(self, args: Namespace) -> int:
        """
        Run the command and return the process exit status. Expected failures
        are raised as SparseWFError and mapped to exit codes by `main`.
        """
        pass
