from pydantic import BaseModel, ConfigDict, Field

from nav_token_merging.core.errors import ConfigError

MICROS_PER_SECOND = 1_000_000

_LATENCY_KEYS = {"inference": "inference_s", "comm": "comm_s", "action": "action_s"}


class LatencyModel(BaseModel):
    """Seconds for one inference, one one-way transfer, and one executed action."""

    model_config = ConfigDict(frozen=True)

    inference_s: float = Field(default=0.2, ge=0.0)
    comm_s: float = Field(default=0.3, ge=0.0)
    action_s: float = Field(default=1.0, ge=0.0)

    @property
    def inference_us(self) -> int:
        return round(self.inference_s * MICROS_PER_SECOND)

    @property
    def comm_us(self) -> int:
        return round(self.comm_s * MICROS_PER_SECOND)

    @property
    def action_us(self) -> int:
        return round(self.action_s * MICROS_PER_SECOND)


def parse_latency(text: str) -> dict[str, float]:
    """Parse ``inference=0.2,comm=0.3,action=1.0`` into config keys.

    Raises:
        ConfigError: unknown name or a value that is not a number
    """
    values: dict[str, float] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, raw = part.partition("=")
        if not sep or name.strip() not in _LATENCY_KEYS:
            raise ConfigError(
                f"expected inference=…,comm=…,action=…, got {part!r}", key="latency"
            )
        try:
            values[_LATENCY_KEYS[name.strip()]] = float(raw)
        except ValueError as e:
            raise ConfigError(f"{name.strip()} is not a number: {raw!r}", key="latency") from e
    return values
