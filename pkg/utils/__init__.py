from .expressions import check_expression, evaluate, highest_mode
from .emit import fmt, read_csv, read_json, write_csv, write_json

__all__ = ['check_expression', 'evaluate', 'highest_mode', 'fmt', 'read_csv', 'read_json', 'write_csv', 'write_json']
