from .preset_service import SCENARIOS, PresetService
from .verification_service import VerificationService


__all__ = ["PresetService", "SCENARIOS", "VerificationService"]
