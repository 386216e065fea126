"""Latency, throughput and message-complexity measurements over run traces."""

from src.core.metrics.complexity import (
    PROTOCOL_PHASES,
    ComplexityReport,
    growth_exponent,
    message_complexity,
)
from src.core.metrics.errors import InvalidDuration, MetricsError, MissingPhaseMarker
from src.core.metrics.latency import LatencyReport, measure_latencies
from src.core.metrics.throughput import MEGABYTE, Throughput, throughput

__all__ = [
    'LatencyReport',
    'measure_latencies',
    'MEGABYTE',
    'Throughput',
    'throughput',
    'PROTOCOL_PHASES',
    'ComplexityReport',
    'message_complexity',
    'growth_exponent',
    'MetricsError',
    'MissingPhaseMarker',
    'InvalidDuration',
]
