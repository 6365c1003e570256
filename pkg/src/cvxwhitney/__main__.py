from .cli import _exit

_exit()
