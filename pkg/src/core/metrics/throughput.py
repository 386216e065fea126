"""Throughput in megabytes per hour and the transaction rate it implies."""

from pydantic import BaseModel, ConfigDict, Field

from src.core.metrics.errors import InvalidDuration

MEGABYTE = 2**20
SECONDS_PER_HOUR = 3600


class Throughput(BaseModel):
    model_config = ConfigDict(frozen=True)

    block_size: int
    t_bc_s: float
    mb_per_hour: float
    tx_per_s: float
    tx_size_kb: float = Field(gt=0)


def throughput(block_size: int, t_bc_s: float, *, tx_size_kb: float = 1.0) -> Throughput:
    """
    Committed data per hour when one block of `block_size` bytes lands every `t_bc_s`.

    Th = (block_size in MB / t_bc) * 3600 M/h, and the transaction rate is
    Th * 1000 KB / (3600 * tx_size_kb): 2 MB every 17.78 s gives about 405 M/h,
    about 112.5 one-kilobyte transactions per second.

    Args:
        block_size: Block size in bytes.
        t_bc_s: Block cycle time in seconds.
        tx_size_kb: Transaction size in KB.

    Raises:
        InvalidDuration: If t_bc_s is not positive.
    """
    if t_bc_s <= 0:
        raise InvalidDuration(t_bc_s)
    mb_per_hour = block_size / MEGABYTE / t_bc_s * SECONDS_PER_HOUR
    tx_per_s = mb_per_hour * 1000 / (SECONDS_PER_HOUR * tx_size_kb)
    return Throughput(
        block_size=block_size,
        t_bc_s=t_bc_s,
        mb_per_hour=mb_per_hour,
        tx_per_s=tx_per_s,
        tx_size_kb=tx_size_kb,
    )
