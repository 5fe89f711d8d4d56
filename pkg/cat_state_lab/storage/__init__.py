from .writers import ResultWriter

__all__ = ["ResultWriter"]
