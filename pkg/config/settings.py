from functools import lru_cache

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class QuadratureDefaults(BaseModel):
    angular_nodes: int = 32
    line_nodes: int = 48
    outer_triangle_order: int = 7
    max_subdivision_depth: int = 10
    tolerance: float = 1e-8
    grading_levels: int = 8
    grading_ratio: float = 0.2
    max_refinements: int = 3


class ExecutionConfig(BaseModel):
    threads: int = Field(default=1, ge=1)
    # points per work item; fixed so results never depend on the thread count
    chunk_size: int = Field(default=512, ge=1)


class StorageConfig(BaseModel):
    results_path: str = "./storage/results"
    archive: bool = False


class ServerConfig(BaseModel):
    host: str = "0.0.0.0"
    port: int = 8000
    reload: bool = False


class Settings(BaseSettings):
    """Process-wide defaults, read from ``POLYRIESZ_*`` variables and ``.env``.

    Nested fields use ``__``, e.g. ``POLYRIESZ_QUADRATURE__TOLERANCE=1e-9``.
    """

    model_config = SettingsConfigDict(
        env_prefix="POLYRIESZ_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
    )

    log_level: str = "INFO"
    quadrature: QuadratureDefaults = QuadratureDefaults()
    execution: ExecutionConfig = ExecutionConfig()
    storage: StorageConfig = StorageConfig()
    server: ServerConfig = ServerConfig()


@lru_cache()
def get_settings() -> Settings:
    return Settings()
