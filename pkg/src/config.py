"""Application configuration using Pydantic settings."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    app_name: str = "Hypergraph Sampling"
    app_version: str = "1.0.0"
    debug: bool = False
    host: str = "127.0.0.1"  # Use HOST=0.0.0.0 when serving an oracle from a container
    port: int = 8000
    log_level: str = "INFO"

    # Remote oracle (tcp://host:port for the line protocol, http(s)://... for the HTTP API)
    oracle_endpoint: str | None = None
    oracle_timeout_seconds: float = 10.0
    oracle_retries: int = 3
    # Token bucket: at most oracle_rate_limit requests per oracle_rate_period_seconds
    oracle_rate_limit: int | None = None
    oracle_rate_period_seconds: float = 86400.0
    # Cool down after the remote side answers 403/429
    oracle_block_minutes: float = 10.0

    # Redis neighborhood cache
    cache_enabled: bool = False
    redis_host: str = "localhost"
    redis_port: int = 6379
    redis_db: int = 0
    # Neighborhoods of a static hypergraph do not change during a crawl (one week)
    cache_expire_seconds: int = 60 * 60 * 24 * 7

    # Exact chain analysis limits
    analysis_dense_limit: int = 2000
    analysis_max_states: int = 1_000_000

    # Evaluation harness
    nrmse_workers: int = 4

    # Dataset served by the HTTP oracle (src.main:app)
    serve_dataset: str | None = None


settings = Settings()
