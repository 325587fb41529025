"""Synchronous ASGI client for exercising the HTTP app without a network stack."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple
from urllib.parse import urlencode

import anyio
from anyio.from_thread import BlockingPortal, start_blocking_portal

DEFAULT_HOST = "testserver"


class Headers(Mapping[str, str]):
    """Case-insensitive response headers."""

    def __init__(self, items: Iterable[Tuple[str, str]]) -> None:
        self._items: List[Tuple[str, str]] = list(items)
        self._lookup: Dict[str, str] = {key.lower(): value for key, value in self._items}

    def __getitem__(self, key: str) -> str:
        return self._lookup[key.lower()]

    def __iter__(self) -> Iterator[str]:
        return (key for key, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)


@dataclass
class Response:
    status_code: int
    headers: Headers
    content: bytes

    def json(self) -> Any:
        return json.loads(self.content.decode("utf-8"))

    @property
    def text(self) -> str:
        return self.content.decode("utf-8")


def _query_string(params: Optional[Mapping[str, Any]]) -> bytes:
    return urlencode(params or {}, doseq=True).encode("latin-1")


async def _call_app(app, method: str, path: str, query: bytes, headers: Mapping[str, str], body: bytes) -> Response:
    status_code: Optional[int] = None
    raw_headers: List[Tuple[str, str]] = []
    chunks = bytearray()
    sent = False
    done = anyio.Event()

    async def receive() -> Dict[str, Any]:
        nonlocal sent
        if sent:
            await done.wait()
            return {"type": "http.disconnect"}
        sent = True
        return {"type": "http.request", "body": body, "more_body": False}

    async def send(message: Dict[str, Any]) -> None:
        nonlocal status_code, raw_headers
        if message["type"] == "http.response.start":
            status_code = message["status"]
            raw_headers = [(key.decode("latin-1"), value.decode("latin-1")) for key, value in message.get("headers", [])]
        elif message["type"] == "http.response.body":
            chunks.extend(message.get("body", b""))
            if not message.get("more_body", False):
                done.set()

    header_list = [(b"host", DEFAULT_HOST.encode("latin-1"))]
    header_list.extend((key.lower().encode("latin-1"), value.encode("latin-1")) for key, value in headers.items())
    if body:
        header_list.append((b"content-length", str(len(body)).encode("latin-1")))
    scope = {
        "type": "http",
        "http_version": "1.1",
        "asgi": {"version": "3.0", "spec_version": "2.3"},
        "method": method,
        "scheme": "http",
        "path": path,
        "raw_path": path.encode("latin-1"),
        "query_string": query,
        "headers": header_list,
        "client": ("testclient", 50000),
        "server": (DEFAULT_HOST, 80),
        "root_path": "",
        "app": app,
        "state": {},
    }
    await app(scope, receive, send)
    assert status_code is not None, "application returned no response"
    return Response(status_code=status_code, headers=Headers(raw_headers), content=bytes(chunks))


async def _startup(app):
    manager = app.router.lifespan_context(app)
    await manager.__aenter__()
    return manager


async def _shutdown(manager) -> None:
    await manager.__aexit__(None, None, None)


class SyncASGIClient:
    """Runs the app's lifespan once and serves blocking requests through an anyio portal."""

    def __init__(self, app) -> None:
        self._app = app
        self._portal_cm = start_blocking_portal()
        self._portal: Optional[BlockingPortal] = self._portal_cm.__enter__()
        self._lifespan = self._portal.call(_startup, app)

    def request(
        self,
        method: str,
        path: str,
        *,
        params: Optional[Mapping[str, Any]] = None,
        headers: Optional[Mapping[str, str]] = None,
        content: bytes = b"",
    ) -> Response:
        assert self._portal is not None, "client is closed"
        return self._portal.call(
            _call_app, self._app, method.upper(), path, _query_string(params), dict(headers or {}), bytes(content)
        )

    def get(self, path: str, **kwargs: Any) -> Response:
        return self.request("GET", path, **kwargs)

    def post(self, path: str, **kwargs: Any) -> Response:
        return self.request("POST", path, **kwargs)

    def close(self) -> None:
        if self._portal is None:
            return
        try:
            self._portal.call(_shutdown, self._lifespan)
        finally:
            self._portal_cm.__exit__(None, None, None)
            self._portal = None


def create_client(app) -> SyncASGIClient:
    return SyncASGIClient(app)
