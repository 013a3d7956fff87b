from storage.result_store import ResultStore
from storage.trace_writer import write_csv

__all__ = ["ResultStore", "write_csv"]
