"""Jaro string similarity with an optional Winkler prefix boost."""

from __future__ import annotations


def jaro_similarity(s1: str, s2: str, winkler: bool = False, prefix_scale: float = 0.1) -> float:
    """Similarity in [0, 1] from matching characters and transpositions.

    Characters match when equal and at most ``max(len)//2 - 1`` positions
    apart. Two empty strings score 1; no matches scores 0. With ``winkler``
    the score is raised by ``prefix_scale`` per shared leading character
    (up to four).
    """
    if s1 == s2:
        return 1.0
    n1, n2 = len(s1), len(s2)
    if n1 == 0 or n2 == 0:
        return 0.0
    window = max(0, max(n1, n2) // 2 - 1)
    taken = [False] * n2
    matched1 = []
    for i, ch in enumerate(s1):
        for j in range(max(0, i - window), min(n2, i + window + 1)):
            if not taken[j] and s2[j] == ch:
                taken[j] = True
                matched1.append(ch)
                break
    m = len(matched1)
    if m == 0:
        return 0.0
    matched2 = [s2[j] for j in range(n2) if taken[j]]
    half_transpositions = sum(a != b for a, b in zip(matched1, matched2)) / 2.0
    score = (m / n1 + m / n2 + (m - half_transpositions) / m) / 3.0
    if winkler:
        prefix = 0
        for a, b in zip(s1[:4], s2[:4]):
            if a != b:
                break
            prefix += 1
        score += prefix * prefix_scale * (1.0 - score)
    return score
