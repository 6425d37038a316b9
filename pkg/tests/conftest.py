"""Shared test helpers."""

from sharpthreshold import boolfn as bf


def monotone_families(max_n: int = 12):
    """The generated monotone families used by the exact-identity sweeps."""
    out = [bf.dictator(2), bf.dictator(5, i=3), bf.conjunction(2), bf.disjunction(2)]
    for n in range(3, max_n + 1, 2):
        out.append(bf.majority(n))
    for n in (4, 6, 9, 12):
        out.append(bf.conjunction(min(n, 6)))
        out.append(bf.disjunction(min(n, 6)))
        for k in (2, n // 2, n - 1):
            out.append(bf.threshold_function(n, k))
    out.append(bf.tribes(2, 2))
    out.append(bf.tribes(3, 2))
    out.append(bf.tribes(2, 4))
    out.append(bf.tribes(3, 4))
    return out
