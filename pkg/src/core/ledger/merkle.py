from collections.abc import Sequence

from src.core.crypto import hash_concat
from src.core.ledger.errors import EmptyMerkleTree


def merkle_root(tx_hashes: Sequence[bytes]) -> bytes:
    """
    Compute a binary Merkle root bottom-up.

    Parent = hash(left || right); an odd node at any level is paired with itself.

    Raises:
        EmptyMerkleTree: If no hashes are given.
    """
    if not tx_hashes:
        raise EmptyMerkleTree()

    level = list(tx_hashes)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [hash_concat(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]
