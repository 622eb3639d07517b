# kgstroll/config.py
# Global configuration: loads KGSTROLL_* environment variables and .env
# Using pydantic-settings to map env vars to Python attributes

from pathlib import Path
from typing import Any

from pydantic_settings import BaseSettings, SettingsConfigDict

from kgstroll import VERSION


class Settings(BaseSettings):
    # -------------------------
    # Logging
    # -------------------------
    LOG_LEVEL: str = "INFO"
    # DEBUG / INFO / WARNING / ERROR

    LOG_FORMAT: str = "text"
    # text | json (json is one serialized loguru record per line)

    LOG_DIR: str = ""
    # Directory for run.log / error.log. Empty = stderr only

    # -------------------------
    # Parallelism
    # -------------------------
    WORKERS: int = 1
    #  >0 = walk-extraction pool width and embedder worker count
    #  0  = auto (cgroup-aware CPU detection)
    # 1 is the only fully deterministic setting for training

    # -------------------------
    # SPARQL connector
    # -------------------------
    CACHE_CAPACITY: int = 100_000
    # Maximum cached hop results (LRU eviction)

    BUNDLE_SIZE: int = 64
    # Subjects per bundled VALUES request

    SPARQL_TIMEOUT: float = 30.0
    # Per-request timeout in seconds

    SPARQL_USER_AGENT: str = f"kgstroll/{VERSION}"

    SPARQL_MAX_GET_LENGTH: int = 2000
    # Queries longer than this are sent as form-encoded POST

    # -------------------------
    # Internal settings
    # -------------------------
    model_config = SettingsConfigDict(
        env_prefix="KGSTROLL_",
        env_file=".env" if Path(".env").exists() else None,
        env_file_encoding="utf-8",
        extra="ignore",
    )

    def model_post_init(self, __context: Any) -> None:
        """Reject settings the pipeline cannot run with."""
        if self.CACHE_CAPACITY < 1:
            raise ValueError("CACHE_CAPACITY must be >= 1")
        if self.BUNDLE_SIZE < 1:
            raise ValueError("BUNDLE_SIZE must be >= 1")
        if self.WORKERS < 0:
            raise ValueError("WORKERS must be >= 0 (0 = auto)")
        if self.LOG_FORMAT.lower() not in ("text", "json"):
            raise ValueError("LOG_FORMAT must be 'text' or 'json'")


# Singleton instance
settings = Settings()
