"""Verification flag vocabulary shared by extraction and the agent."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class FlagCode(enum.Enum):
    NO_SCALE_TEXT = "NoScaleText"
    UNKNOWN_UNIT = "UnknownUnit"
    VALUE_TEXT_MISMATCH = "ValueTextMismatch"
    PITCH_OUT_OF_RANGE = "PitchOutOfRange"
    LOW_DETECTION_CONFIDENCE = "LowDetectionConfidence"
    LOW_OCR_CONFIDENCE = "LowOcrConfidence"
    INTER_BAR_INCONSISTENCY = "InterBarInconsistency"


# severity is a pure function of the code
ERROR_CODES = frozenset({
    FlagCode.NO_SCALE_TEXT,
    FlagCode.UNKNOWN_UNIT,
    FlagCode.VALUE_TEXT_MISMATCH,
    FlagCode.PITCH_OUT_OF_RANGE,
})


@dataclass(frozen=True)
class Flag:
    code: FlagCode
    message: str

    @property
    def severity(self) -> str:
        return "error" if self.code in ERROR_CODES else "warn"

    def to_json(self) -> dict:
        return {"code": self.code.value, "severity": self.severity, "message": self.message}

    @classmethod
    def from_json(cls, obj: dict) -> "Flag":
        return cls(FlagCode(obj["code"]), obj.get("message", ""))
