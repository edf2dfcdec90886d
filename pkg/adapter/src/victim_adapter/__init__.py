"""HTTP adapter exposing any video classifier callable over the victim
wire protocol (GET /v1/info, POST /v1/query, POST /v1/query_batch)."""
from .server import AdapterConfig, AdapterServer, load_entrypoint

__all__ = ["AdapterConfig", "AdapterServer", "load_entrypoint"]
__version__ = "0.1.0"
