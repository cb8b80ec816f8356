"""Neighborhood query endpoints of the HTTP oracle."""

import logging

from fastapi import APIRouter, HTTPException, Request

from src.exceptions import UnknownHyperedge, UnknownNode
from src.models.hypergraph import Hypergraph
from src.models.schemas import ErrorResponse, NeighborhoodResponse

logger = logging.getLogger(__name__)

router = APIRouter(tags=["oracle"])

_responses = {
    404: {"model": ErrorResponse, "description": "Unknown label"},
    500: {"model": ErrorResponse, "description": "Internal server error"},
    503: {"model": ErrorResponse, "description": "No hypergraph loaded"},
}


def _served(request: Request) -> Hypergraph:
    hypergraph = getattr(request.app.state, "hypergraph", None)
    if hypergraph is None:
        raise HTTPException(status_code=503, detail="No hypergraph is being served")
    request.app.state.requests_served = getattr(request.app.state, "requests_served", 0) + 1
    return hypergraph


@router.get(
    "/node/{label}",
    response_model=NeighborhoodResponse,
    responses=_responses,
    summary="Query a node",
    description="Labels of the hyperedges containing the node.",
)
async def query_node(label: str, request: Request) -> NeighborhoodResponse:
    """
    Answer a node query.

    Raises:
        HTTPException: 404 for an unknown node, 503 when nothing is served.
    """
    hypergraph = _served(request)
    try:
        i = hypergraph.node_index(label)
        neighbors = [hypergraph.hyperedge_label(alpha) for alpha in hypergraph.incident(i)]
        return NeighborhoodResponse(label=label, neighbors=neighbors)
    except UnknownNode as e:
        raise HTTPException(status_code=404, detail=str(e)) from e
    except Exception as e:
        logger.error(f"Failed to answer node query {label}: {e}")
        raise HTTPException(status_code=500, detail=f"Failed to answer query: {e}") from e


@router.get(
    "/hyperedge/{label}",
    response_model=NeighborhoodResponse,
    responses=_responses,
    summary="Query a hyperedge",
    description="Labels of the member nodes of the hyperedge.",
)
async def query_hyperedge(label: str, request: Request) -> NeighborhoodResponse:
    hypergraph = _served(request)
    try:
        alpha = hypergraph.hyperedge_index(label)
        neighbors = [hypergraph.node_label(i) for i in hypergraph.members(alpha)]
        return NeighborhoodResponse(label=label, neighbors=neighbors)
    except UnknownHyperedge as e:
        raise HTTPException(status_code=404, detail=str(e)) from e
    except Exception as e:
        logger.error(f"Failed to answer hyperedge query {label}: {e}")
        raise HTTPException(status_code=500, detail=f"Failed to answer query: {e}") from e
