"""Bridgify Commands Package"""
from .bridge import cmd_bridge
from .rare import cmd_rare
from .smooth import cmd_smooth
from .occupation import cmd_occupation

__all__ = ["cmd_bridge", "cmd_rare", "cmd_smooth", "cmd_occupation"]
