from .state_json import StateParser, dump_state, parse_shorthand, save_state

__all__ = ["StateParser", "parse_shorthand", "dump_state", "save_state"]
