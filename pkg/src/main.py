"""FastAPI application serving a hypergraph as a restricted-access query oracle."""

import logging
from collections.abc import AsyncIterator
from contextlib import asynccontextmanager

from fastapi import FastAPI

from src.config import settings
from src.models.hypergraph import Hypergraph
from src.models.schemas import HealthResponse
from src.routes import oracle
from src.services.loaders import load_hypergraph

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper()),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)


def create_app(hypergraph: Hypergraph | None = None) -> FastAPI:
    """
    Build the oracle app.

    Without an explicit hypergraph, settings.serve_dataset is loaded at startup.
    """

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        if app.state.hypergraph is None and settings.serve_dataset:
            app.state.hypergraph = load_hypergraph(settings.serve_dataset)
        if app.state.hypergraph is None:
            logger.warning("No dataset configured; queries will answer 503")
        else:
            logger.info(f"Serving {app.state.hypergraph!r}")
        yield

    app = FastAPI(
        title=settings.app_name,
        version=settings.app_version,
        description="Node and hyperedge neighborhood queries over a loaded hypergraph.",
        docs_url="/docs",
        redoc_url="/redoc",
        lifespan=lifespan,
    )
    app.state.hypergraph = hypergraph
    app.state.requests_served = 0
    app.include_router(oracle.router, prefix="/api/v1")

    @app.get("/health", response_model=HealthResponse, tags=["health"])
    async def health_check() -> HealthResponse:
        """Health check endpoint."""
        served = app.state.hypergraph
        return HealthResponse(
            status="healthy",
            version=settings.app_version,
            dataset=(
                {"n": served.node_count, "m": served.hyperedge_count}
                if served is not None
                else None
            ),
        )

    @app.get("/", tags=["root"])
    async def root() -> dict:
        """Root endpoint with API information."""
        return {
            "name": settings.app_name,
            "version": settings.app_version,
            "docs": "/docs",
            "health": "/health",
        }

    return app


app = create_app()


if __name__ == "__main__":  # pragma: no cover
    import uvicorn

    uvicorn.run(
        "src.main:app",
        host=settings.host,
        port=settings.port,
        reload=settings.debug,
    )
