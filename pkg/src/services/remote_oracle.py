"""Remote oracle backends for restricted-access hypergraphs.

Two transports are supported:

* a newline-delimited text protocol over TCP: ``N <label>`` is answered with the
  space-separated labels of the incident hyperedges, ``E <label>`` with the
  space-separated labels of the member nodes; error replies start with ``!``;
* an HTTP API (``GET /api/v1/node/{label}``, ``GET /api/v1/hyperedge/{label}``)
  as served by ``src.main:app``.

Keys of remote oracles are labels.
"""

import asyncio
import logging
import socket
import threading
import time
from collections.abc import Callable
from datetime import datetime, timedelta, timezone

UTC = timezone.utc
from urllib.parse import quote, urlparse

import requests

from src.config import settings
from src.exceptions import RemoteOracleError, UnknownHyperedge, UnknownNode
from src.models.hypergraph import Hypergraph
from src.models.schemas import QueryBudget
from src.services.oracle import QueryOracle

logger = logging.getLogger(__name__)


class TokenBucket:
    """
    Allows at most ``capacity`` requests per ``period`` seconds on average.

    The bucket starts full and refills continuously; acquire() blocks until a
    token is available.
    """

    def __init__(
        self,
        capacity: int,
        period: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if capacity < 1 or period <= 0:
            raise ValueError("capacity must be >= 1 and period > 0")
        self.capacity = capacity
        self.rate = capacity / period
        self.tokens = float(capacity)
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
        self._last = now

    def acquire(self) -> None:
        with self._lock:
            self._refill()
            if self.tokens < 1:
                wait = (1 - self.tokens) / self.rate
                logger.debug(f"Rate limiting: sleeping for {wait:.2f} seconds")
                self._sleep(wait)
                self._refill()
            self.tokens -= 1


def rate_limiter_from_settings() -> TokenBucket | None:
    if settings.oracle_rate_limit is None:
        return None
    return TokenBucket(settings.oracle_rate_limit, settings.oracle_rate_period_seconds)


class LineProtocolOracle(QueryOracle):
    """Client of the line protocol; one outstanding request per connection."""

    def __init__(
        self,
        host: str,
        port: int,
        timeout: float | None = None,
        retries: int | None = None,
        rate_limiter: TokenBucket | None = None,
        budget: QueryBudget | None = None,
    ):
        super().__init__(budget)
        self.host = host
        self.port = port
        self.timeout = settings.oracle_timeout_seconds if timeout is None else timeout
        self.retries = settings.oracle_retries if retries is None else retries
        self.rate_limiter = rate_limiter
        self._socket: socket.socket | None = None
        self._stream = None
        self._request_lock = threading.Lock()

    def _connect(self) -> None:
        self._socket = socket.create_connection((self.host, self.port), timeout=self.timeout)
        self._stream = self._socket.makefile("rwb")
        logger.debug(f"Connected to line oracle at {self.host}:{self.port}")

    def close(self) -> None:
        if self._stream is not None:
            try:
                self._stream.close()
            except OSError:
                pass
        if self._socket is not None:
            self._socket.close()
        self._socket = None
        self._stream = None

    def __enter__(self) -> "LineProtocolOracle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _request(self, verb: str, label: str) -> list[str]:
        if any(ch.isspace() for ch in label) or not label:
            raise RemoteOracleError(f"Label {label!r} cannot be sent over the line protocol")
        message = f"{verb} {label}\n".encode()
        with self._request_lock:
            for attempt in range(self.retries + 1):
                try:
                    if self._stream is None:
                        self._connect()
                    if self.rate_limiter is not None:
                        self.rate_limiter.acquire()
                    self._stream.write(message)
                    self._stream.flush()
                    reply = self._stream.readline()
                    if not reply:
                        raise ConnectionError("connection closed by oracle")
                    break
                except OSError as e:
                    self.close()
                    if attempt == self.retries:
                        logger.error(f"Line oracle request {verb} {label} failed: {e}")
                        raise RemoteOracleError(f"{verb} {label}: {e}") from e
                    logger.warning(f"Line oracle request {verb} {label} failed ({e}), retrying")

        text = reply.decode("utf-8").strip()
        if text.startswith("!"):
            if verb == "N":
                raise UnknownNode(label)
            raise UnknownHyperedge(label)
        if not text:
            raise RemoteOracleError(f"Empty answer to {verb} {label}")
        return text.split()

    def _fetch_node(self, node) -> list:
        return self._request("N", str(node))

    def _fetch_hyperedge(self, hyperedge) -> list:
        return self._request("E", str(hyperedge))


class HttpOracle(QueryOracle):
    """Client of the HTTP oracle API with retries and a circuit breaker on 403/429."""

    def __init__(
        self,
        base_url: str,
        timeout: float | None = None,
        retries: int | None = None,
        rate_limiter: TokenBucket | None = None,
        budget: QueryBudget | None = None,
    ):
        super().__init__(budget)
        self.base_url = base_url.rstrip("/")
        self.timeout = settings.oracle_timeout_seconds if timeout is None else timeout
        self.retries = settings.oracle_retries if retries is None else retries
        self.rate_limiter = rate_limiter
        self.session = requests.Session()
        self.session.headers.update({"Accept": "application/json"})
        # Simple Circuit Breaker state
        self.blocked_until: datetime | None = None

    def _is_blocked(self) -> bool:
        """Check if we are in a 'cool down' period after the server refused us."""
        if self.blocked_until and datetime.now(UTC) < self.blocked_until:
            return True
        self.blocked_until = None
        return False

    def _get(self, path: str, label: str, unknown: type[Exception]) -> list[str]:
        if self._is_blocked():
            raise RemoteOracleError(f"Oracle is temporarily blocked until {self.blocked_until}")

        url = f"{self.base_url}/api/v1/{path}/{quote(label, safe='')}"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            try:
                response = self.session.get(url, timeout=self.timeout)
            except requests.RequestException as e:
                last_error = e
                logger.warning(f"Request to {url} failed (attempt {attempt + 1}): {e}")
                continue

            if response.status_code == 404:
                raise unknown(label)
            if response.status_code in (403, 429):
                logger.error(
                    f"Oracle returned {response.status_code}. Tripping circuit breaker for "
                    f"{settings.oracle_block_minutes} minutes."
                )
                self.blocked_until = datetime.now(UTC) + timedelta(
                    minutes=settings.oracle_block_minutes
                )
                raise RemoteOracleError(f"Oracle refused request with {response.status_code}")
            if response.status_code >= 500:
                last_error = RemoteOracleError(f"Oracle answered {response.status_code}")
                logger.warning(f"{url} answered {response.status_code} (attempt {attempt + 1})")
                continue

            response.raise_for_status()
            neighbors = response.json().get("neighbors")
            if not isinstance(neighbors, list):
                raise RemoteOracleError(f"Malformed answer from {url}")
            return [str(x) for x in neighbors]

        logger.error(f"Giving up on {url} after {self.retries + 1} attempts")
        raise RemoteOracleError(f"{url}: {last_error}") from last_error

    def _fetch_node(self, node) -> list:
        return self._get("node", str(node), UnknownNode)

    def _fetch_hyperedge(self, hyperedge) -> list:
        return self._get("hyperedge", str(hyperedge), UnknownHyperedge)


def connect_remote(endpoint: str, budget: QueryBudget | None = None) -> QueryOracle:
    """Build a remote oracle from ``tcp://host:port`` or ``http(s)://host[:port]``."""
    parsed = urlparse(endpoint)
    limiter = rate_limiter_from_settings()
    if parsed.scheme == "tcp":
        if not parsed.hostname or not parsed.port:
            raise ValueError(f"Endpoint {endpoint} needs a host and a port")
        return LineProtocolOracle(parsed.hostname, parsed.port, rate_limiter=limiter, budget=budget)
    if parsed.scheme in ("http", "https"):
        return HttpOracle(endpoint, rate_limiter=limiter, budget=budget)
    raise ValueError(f"Unsupported oracle endpoint scheme: {endpoint}")


class LineOracleServer:
    """Serves a hypergraph over the line protocol (asyncio)."""

    def __init__(self, hypergraph: Hypergraph, host: str = "127.0.0.1", port: int = 0):
        self.hypergraph = hypergraph
        self.host = host
        self.port = port
        self.requests_served = 0
        self._server: asyncio.Server | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None

    def answer(self, request: str) -> str:
        """Reply line (without newline) for one request line."""
        verb, _, label = request.strip().partition(" ")
        h = self.hypergraph
        try:
            if verb == "N":
                i = h.node_index(label)
                return " ".join(h.hyperedge_label(a) for a in h.incident(i))
            if verb == "E":
                alpha = h.hyperedge_index(label)
                return " ".join(h.node_label(i) for i in h.members(alpha))
        except (UnknownNode, UnknownHyperedge) as e:
            return f"!{e}"
        return f"!bad request: {request.strip()}"

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            while line := await reader.readline():
                self.requests_served += 1
                writer.write((self.answer(line.decode("utf-8")) + "\n").encode("utf-8"))
                await writer.drain()
        except ConnectionError as e:
            logger.debug(f"Client connection dropped: {e}")
        finally:
            writer.close()

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info(f"Line oracle serving {self.hypergraph!r} on {self.host}:{self.port}")

    async def serve_forever(self) -> None:
        await self.start()
        async with self._server:
            await self._server.serve_forever()

    def run_in_background(self) -> tuple[str, int]:
        """Start serving on a daemon thread; returns the bound (host, port)."""
        self._loop = asyncio.new_event_loop()
        ready = threading.Event()

        def runner() -> None:
            asyncio.set_event_loop(self._loop)
            self._loop.run_until_complete(self.start())
            ready.set()
            self._loop.run_forever()

        self._thread = threading.Thread(target=runner, name="line-oracle", daemon=True)
        self._thread.start()
        if not ready.wait(timeout=10):
            raise RuntimeError("Line oracle server did not start")
        return self.host, self.port

    def stop(self) -> None:
        if self._loop is None:
            return

        def shutdown() -> None:
            if self._server is not None:
                self._server.close()
            self._loop.stop()

        self._loop.call_soon_threadsafe(shutdown)
        self._thread.join(timeout=10)
        self._loop.close()
        self._loop = None
