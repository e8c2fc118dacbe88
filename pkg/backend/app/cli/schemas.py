from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.constants import MAX_PI_DIGITS

OutputFormat = Literal["csv", "json", "text"]
VerdictName = Literal["proven_strict", "proven_holds", "proven_false", "inconclusive"]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int | None = Field(default=None, ge=1, description="Single measure index")
    n_max: int | None = Field(default=None, ge=1, description="Upper end of the range 1..n_max")
    k_max: int | None = Field(default=None, ge=1)
    m_max: int | None = Field(default=None, ge=1)
    digits: int = Field(default=50, ge=1, le=MAX_PI_DIGITS, description="Decimal places of the pi interval")
    seed: int = Field(default=0, ge=0, lt=2**64)
    format: OutputFormat = "json"
    out: str | None = Field(default=None, description="Report path; stdout when omitted")
    fn: str | None = None
    gn: str | None = None
    sizes: str | None = None
    trials: int | None = Field(default=None, ge=1)
    subseq: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _single_or_range(self) -> "RunConfig":
        if self.n is not None and self.n_max is not None:
            raise ValueError("--n and --n-max are mutually exclusive")
        if (self.fn is None) != (self.gn is None):
            raise ValueError("--fn and --gn must be given together")
        if self.subseq is not None and any(b <= a for a, b in zip(self.subseq, self.subseq[1:])):
            raise ValueError("--subseq must be strictly increasing")
        return self

    def n_values(self, default_max: int) -> list[int]:
        if self.n is not None:
            return [self.n]
        return list(range(1, (self.n_max or default_max) + 1))

    def report_fields(self) -> dict[str, Any]:
        """Config as echoed into reports; the output location is not part of it."""
        return self.model_dump(mode="json", exclude={"out"}, exclude_none=True)


class Report(BaseModel):
    command: str
    config: dict[str, Any]
    results: dict[str, Any]
    verdict: VerdictName
