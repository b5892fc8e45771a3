import os
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
import ujson
from pydantic import BaseModel, Field


logger = structlog.get_logger()

VERSION_FILE = Path(__file__).parent.parent.parent / "version.json"
DEFAULT_VERSION = "0.3.0"


class VersionInfo(BaseModel):
    app_version: str = DEFAULT_VERSION
    report_version: str = Field("1", description="Bumped when RunReport fields change")
    build_date: Optional[str] = None
    release_notes: str = "Development build"
    environment: str = Field(default_factory=lambda: os.getenv("REKS_ENVIRONMENT", "development"))
    git_commit: str = Field(default_factory=lambda: (os.getenv("GITHUB_SHA") or "local")[:8])

    def banner(self) -> str:
        return f"reks {self.app_version} (reports v{self.report_version}, {self.environment}, {self.git_commit})"


def load_version_info(path: Path = VERSION_FILE) -> VersionInfo:
    """Read version.json; an installed package without the file gets the defaults."""
    if not path.exists():
        return VersionInfo()
    try:
        return VersionInfo(**ujson.loads(path.read_text()))
    except (ValueError, TypeError) as e:
        logger.warning("version_file_unreadable", path=str(path), error=str(e))
        return VersionInfo()


_version_info = load_version_info()


def get_app_version() -> str:
    return _version_info.app_version


def get_full_version_info() -> Dict[str, Any]:
    return _version_info.model_dump()
