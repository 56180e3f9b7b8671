"""Linearly load-balanced coordinate partitioning for master shards."""

from ...errors import ConfigError


def balanced_ranges(dim, n_masters):
    """Split ``[0, dim)`` into contiguous ranges whose sizes differ by <= 1.

    The first ``dim % n_masters`` ranges carry the extra coordinate, so
    e.g. dim=10 over 3 masters gives (0,4), (4,7), (7,10).
    """
    if n_masters < 1 or n_masters > dim:
        raise ConfigError(f"need 1 <= n_masters <= dim, got {n_masters} masters for dim {dim}")
    base, extra = divmod(dim, n_masters)
    ranges = []
    for i in range(n_masters):
        lo = i * base + min(i, extra)
        hi = lo + base + (1 if i < extra else 0)
        ranges.append((lo, hi))
    return ranges


def owners_of(coords, ranges):
    """Master indices owning any of the given coordinates (sorted)."""
    owners = set()
    for c in coords:
        for i, (lo, hi) in enumerate(ranges):
            if lo <= c < hi:
                owners.add(i)
                break
        else:
            raise ConfigError(f"coordinate {c} outside every master range")
    return sorted(owners)
