"""Delay models: synchronous, partially synchronous and asynchronous links."""

import math
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class SynchronyKind(StrEnum):
    SYNCHRONOUS = 'synchronous'
    PARTIAL = 'partial'
    ASYNCHRONOUS = 'asynchronous'


class SynchronyModel(BaseModel):
    """
    Per-message delay law plus optional channel effects.

    synchronous: uniform on [min_delay_ms, delta_ms].
    partial: log-normal before gst_ms, capped so the message arrives by
        gst_ms + delta_ms; synchronous afterwards.
    asynchronous: log-normal with unbounded support.

    With `shared_medium`, all transmissions are serialised on one channel, each
    occupying `airtime_ms` plus its transfer time. With
    `bandwidth_bytes_per_ms`, a message of `size` bytes takes size/bandwidth
    ms, stretched by 1/(1 - size/window) for a congestion window.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: SynchronyKind = SynchronyKind.SYNCHRONOUS
    delta_ms: float = Field(default=100.0, gt=0)
    min_delay_ms: float = Field(default=1.0, ge=0)
    gst_ms: float = Field(default=0.0, ge=0)
    lognormal_mu: float = 3.5
    lognormal_sigma: float = Field(default=1.0, gt=0)
    shared_medium: bool = False
    airtime_ms: float = Field(default=0.0, ge=0)
    bandwidth_bytes_per_ms: float | None = Field(default=None, gt=0)
    congestion_window_bytes: float | None = Field(default=None, gt=0)

    @model_validator(mode='after')
    def _check_bounds(self) -> 'SynchronyModel':
        if self.min_delay_ms > self.delta_ms:
            raise ValueError('min_delay_ms must not exceed delta_ms')
        return self

    @property
    def mean_delay_ms(self) -> float:
        """Expected propagation delay; used to size protocol timeouts."""
        if self.kind == SynchronyKind.ASYNCHRONOUS:
            return math.exp(self.lognormal_mu + self.lognormal_sigma**2 / 2)
        return (self.min_delay_ms + self.delta_ms) / 2

    def propagation_delay(self, rng: np.random.Generator, now: float) -> float:
        """Sample one propagation delay for a message sent at `now`."""
        if self.kind == SynchronyKind.SYNCHRONOUS or (
            self.kind == SynchronyKind.PARTIAL and now >= self.gst_ms
        ):
            return float(rng.uniform(self.min_delay_ms, self.delta_ms))
        heavy = float(rng.lognormal(self.lognormal_mu, self.lognormal_sigma))
        if self.kind == SynchronyKind.PARTIAL:
            return min(heavy, self.gst_ms + self.delta_ms - now)
        return heavy

    def transfer_ms(self, size: int) -> float:
        """Serialisation time for `size` bytes under the link-capacity options."""
        if self.bandwidth_bytes_per_ms is None:
            return 0.0
        base = size / self.bandwidth_bytes_per_ms
        if self.congestion_window_bytes is None:
            return base
        utilisation = min(size / self.congestion_window_bytes, 0.95)
        return base / (1.0 - utilisation)
