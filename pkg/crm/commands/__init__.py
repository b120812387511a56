"""
Commands Package

One module per `crm` subcommand. Each module defines NAME, HELP,
WRITES_DATA (the command writes its data file to --out or stdout),
add_arguments(parser) and run(args) returning the data of the response
envelope.
"""

# Import all command modules so the registry is complete
from . import bounds, compare, evaluate, grid, simulate, train, verify_kernel, weights

# Modules in the order the CLI lists them
all_commands = [
    simulate,
    train,
    evaluate,
    compare,
    bounds,
    grid,
    weights,
    verify_kernel,
]
