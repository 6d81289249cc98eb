"""
Bridgify - bridging distributions for population Markov jump processes

A minimal typer application entry point that wires up all commands.
"""
from typing import Annotated, Optional
import typer
from config import setup_logging
from commands import cmd_bridge, cmd_rare, cmd_smooth, cmd_occupation

# Create typer app
app = typer.Typer(
    name="bridgify",
    help="Bridging distributions, rare-event bounds and smoothing for reaction networks",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
def configure(
    log_level: Annotated[Optional[str], typer.Option("--log-level", help="Logging level")] = None,
):
    """Configure logging before any command runs."""
    setup_logging(log_level)


# Register commands
app.command("bridge")(cmd_bridge)
app.command("rare")(cmd_rare)
app.command("smooth")(cmd_smooth)
app.command("occupation")(cmd_occupation)


def main():
    app()


if __name__ == "__main__":
    main()
