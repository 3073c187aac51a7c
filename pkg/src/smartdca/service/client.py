"""Thin HTTP client used by the CLI.

By default the client talks to an in-process instance of the service
through an ASGI transport (no server needs to run); pass a base URL to
target a remote deployment instead. Either way the CLI only ever sees the
HTTP contract.
"""

from __future__ import annotations

import asyncio

import httpx

from .. import errors
from .app import create_app

_ERROR_TYPES = {
    name: getattr(errors, name)
    for name in dir(errors)
    if isinstance(getattr(errors, name), type) and issubclass(getattr(errors, name), Exception)
}


class ServiceError(errors.SmartDcaError):
    """Raised for transport/HTTP failures that carry no package error."""


class _InProcessTransport(httpx.BaseTransport):
    """Route a sync httpx client straight into the ASGI app, one loop per call."""

    def __init__(self, app):
        self._app = app

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def roundtrip():
            transport = httpx.ASGITransport(app=self._app)
            req = httpx.Request(
                request.method, request.url, headers=request.headers, content=request.read()
            )
            resp = await transport.handle_async_request(req)
            content = await resp.aread()
            await transport.aclose()
            return httpx.Response(resp.status_code, headers=resp.headers, content=content)

        return asyncio.run(roundtrip())


class ServiceClient:
    def __init__(self, base_url: str | None = None):
        if base_url:
            self._client = httpx.Client(base_url=base_url.rstrip("/"), timeout=600.0)
        else:
            self._client = httpx.Client(
                transport=_InProcessTransport(create_app()), base_url="http://smartdca.internal"
            )

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        self._client.close()

    def _raise_for(self, resp: httpx.Response) -> None:
        if resp.status_code == 200:
            return
        try:
            body = resp.json()
        except ValueError:
            body = {}
        name = body.get("error")
        message = body.get("message") or body.get("detail") or resp.text
        exc_type = _ERROR_TYPES.get(name, ServiceError)
        raise exc_type(str(message))

    def get(self, path: str) -> dict:
        resp = self._client.get(path)
        self._raise_for(resp)
        return resp.json()

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        self._raise_for(resp)
        return resp.json()
