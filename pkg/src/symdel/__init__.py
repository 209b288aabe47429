"""symdel: symbolic-task data pipeline, text-to-symbol metrics, and the
symbol-plus-delegation execution harness."""

__version__ = "0.1.0"
