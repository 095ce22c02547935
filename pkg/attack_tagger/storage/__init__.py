from .audit_log import AUDIT_FIELDS, AuditLog
from .container import (
    FORMAT_VERSION,
    MAGIC,
    load_hierarchical,
    load_model,
    load_model_file,
    save_model,
    save_model_file,
)

__all__ = [
    "AUDIT_FIELDS",
    "AuditLog",
    "FORMAT_VERSION",
    "MAGIC",
    "load_hierarchical",
    "load_model",
    "load_model_file",
    "save_model",
    "save_model_file",
]
