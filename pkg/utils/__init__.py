from .logs import log_emit, set_context, add_context, configure_default_sink

__all__ = ["log_emit", "set_context", "add_context", "configure_default_sink"]
