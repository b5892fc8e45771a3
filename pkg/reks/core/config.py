import os

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    PROJECT_NAME: str = "reks"

    # Environment
    ENVIRONMENT: str = os.getenv("REKS_ENVIRONMENT", "development")

    # Truncation window D: simplicial levels 0..D, homology in degrees < D
    MAX_DIM: int = int(os.getenv("REKS_MAX_DIM", "6"))

    # Enumeration caps
    MAX_GROUP_ORDER: int = int(os.getenv("REKS_MAX_GROUP_ORDER", "24"))
    MAX_S21_DEGREE: int = int(os.getenv("REKS_MAX_S21_DEGREE", "4"))
    MAX_RANK: int = int(os.getenv("REKS_MAX_RANK", "2"))
    MAX_RING_ORDER: int = int(os.getenv("REKS_MAX_RING_ORDER", "16"))
    ENUMERATION_LIMIT: int = int(os.getenv("REKS_ENUMERATION_LIMIT", "200000"))

    # Randomized suites and sampling
    SEED: int = int(os.getenv("REKS_SEED", "0"))

    # Logging
    LOG_LEVEL: str = os.getenv("REKS_LOG_LEVEL", "INFO")
    LOG_FORMAT: str = os.getenv("REKS_LOG_FORMAT", "console")

    class Config:
        env_file = ".env"
        env_prefix = "REKS_"
        extra = "ignore"


settings = Settings()
