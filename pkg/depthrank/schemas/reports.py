"""
Test report schemas.

TestReport is what every test in the services returns; the command layer
narrows it to the documented JSON payloads with ``qtest_response`` and
``competitor_response``.
"""

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class QResult(BaseModel):
    """Q(F_m, G_n) with its null standardization and plug-in variances."""

    q: float = Field(ge=0.0, le=1.0)
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    sigma2_gf_hat: float = Field(ge=0.0)
    sigma2_fg_hat: float = Field(ge=0.0)
    z_null: float
    p_null: float = Field(ge=0.0, le=1.0)


class TestReport(BaseModel):
    """Outcome of one two-sample test."""

    __test__ = False  # not a pytest class

    test: str
    statistic: float
    p_value: float = Field(ge=0.0, le=1.0)
    alpha: float = Field(gt=0.0, lt=1.0)
    reject: bool
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    z: Optional[float] = None
    df: Optional[int] = None
    sigma2_gf_hat: Optional[float] = None
    sigma2_fg_hat: Optional[float] = None
    q0: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    method: Optional[str] = None
    mode: Optional[str] = None
    mc_se: Optional[float] = None

    @model_validator(mode="after")
    def _check_interval(self) -> "TestReport":
        if self.ci_low is not None and self.ci_high is not None and self.ci_low > self.ci_high:
            raise ValueError("confidence interval bounds are reversed")
        return self


class QTestResponse(BaseModel):
    """JSON payload of the qtest command."""

    q: float
    m: int
    n: int
    z: float
    p_value: float
    reject: bool
    sigma2_gf_hat: float
    sigma2_fg_hat: float
    method: str
    mode: str
    alpha: float
    q0: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None


class CompetitorResponse(BaseModel):
    """JSON payload of the competitor command."""

    test: str
    statistic: float
    df: int
    p_value: float
    reject: bool
    mode: str
    alpha: float
    mc_se: Optional[float] = None


class ErrorResponse(BaseModel):
    """JSON payload written when a command fails."""

    error: str
    message: str
    details: dict = Field(default_factory=dict)
    hint: Optional[str] = None


def qtest_response(report: TestReport) -> QTestResponse:
    """Convert a Q test report to the qtest payload."""
    return QTestResponse(
        q=report.statistic,
        m=report.m,
        n=report.n,
        z=report.z if report.z is not None else 0.0,
        p_value=report.p_value,
        reject=report.reject,
        sigma2_gf_hat=report.sigma2_gf_hat or 0.0,
        sigma2_fg_hat=report.sigma2_fg_hat or 0.0,
        method=report.method or "",
        mode=report.mode or "",
        alpha=report.alpha,
        q0=report.q0,
        ci_low=report.ci_low,
        ci_high=report.ci_high,
    )


def competitor_response(report: TestReport) -> CompetitorResponse:
    """Convert a T² or Oja report to the competitor payload."""
    return CompetitorResponse(
        test=report.test,
        statistic=report.statistic,
        df=report.df or 0,
        p_value=report.p_value,
        reject=report.reject,
        mode=report.mode or "",
        alpha=report.alpha,
        mc_se=report.mc_se,
    )
