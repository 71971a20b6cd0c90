"""Subcommand modules."""
from cli.commands import modes
from cli.commands import rate
from cli.commands import scatter
from cli.commands import solve
from cli.commands import verify
from cli.commands import waveop

# Include all subcommands, in help order
COMMANDS = [verify, solve, waveop, scatter, rate, modes]
