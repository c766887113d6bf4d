"""Interactive debugger for a spoken-digit CNN: training, layer
introspection, feature-to-audio resynthesis, adversarial audio edits, and
the HTTP API serving the web UI."""

__version__ = "0.1.0"
