"""Reference-based text metrics for open-ended answers.

Both metrics operate on token lists from the shared tokenizer
(:func:`egoavu.diversity.tokenize`) so candidate and reference are always
normalized identically.
"""

from __future__ import annotations


def lcs_length(a: list[str], b: list[str]) -> int:
    """Length of the longest common subsequence (iterative DP, O(len*len))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok in a:
        cur = [0] * (len(b) + 1)
        for j, other in enumerate(b, start=1):
            if tok == other:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> float:
    """LCS-based F1: 2PR / (P + R) with P = LCS/|cand|, R = LCS/|ref|."""
    if not candidate or not reference:
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return 2.0 * p * r / (p + r)


def _align_exact(candidate: list[str], reference: list[str]) -> list[tuple[int, int]]:
    """Leftmost-greedy exact unigram alignment; each token is matched once."""
    used = [False] * len(reference)
    positions: dict[str, list[int]] = {}
    for j, tok in enumerate(reference):
        positions.setdefault(tok, []).append(j)
    cursor: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    for i, tok in enumerate(candidate):
        slots = positions.get(tok)
        if not slots:
            continue
        k = cursor.get(tok, 0)
        while k < len(slots) and used[slots[k]]:
            k += 1
        cursor[tok] = k
        if k < len(slots):
            j = slots[k]
            used[j] = True
            cursor[tok] = k + 1
            pairs.append((i, j))
    return pairs


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    """Contiguous aligned runs: both indices advance by exactly one."""
    by_candidate = sorted(pairs)
    chunks = 0
    prev: tuple[int, int] | None = None
    for i, j in by_candidate:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(candidate: list[str], reference: list[str]) -> float:
    """Exact-match unigram score with a fragmentation penalty.

    m matched unigrams give P = m/|cand| and R = m/|ref|; the harmonic mean
    F = 10PR / (R + 9P) is discounted by 0.5 * (chunks/m)^3 where chunks is
    the number of contiguous aligned runs. Zero matches score 0. This is the
    exact-match variant: no stemming or synonym tables, so scores are
    deterministic and dependency-free.
    """
    if not candidate or not reference:
        return 0.0
    pairs = _align_exact(candidate, reference)
    m = len(pairs)
    if m == 0:
        return 0.0
    p = m / len(candidate)
    r = m / len(reference)
    f_mean = 10.0 * p * r / (r + 9.0 * p)
    chunks = _count_chunks(pairs)
    penalty = 0.5 * (chunks / m) ** 3
    return f_mean * (1.0 - penalty)
