from .loaders import iter_state_bytes
from .exporters import export_csv, export_json, write_csv, write_json

__all__ = ["iter_state_bytes", "export_csv", "export_json", "write_csv", "write_json"]
