from .app import app, create_app
from .client import ServiceClient

__all__ = ["app", "create_app", "ServiceClient"]
