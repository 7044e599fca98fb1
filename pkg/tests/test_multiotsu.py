import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degradeiqa.distortions.multiotsu import between_class_score, multiotsu_cuts, quantize_plane
from degradeiqa.errors import InvalidArgument
from oracles import multiotsu_bruteforce


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=4, max_size=14), st.integers(2, 4))
def test_dp_matches_exhaustive(hist, k):
    if len(hist) < k or sum(hist) == 0:
        return
    cuts = multiotsu_cuts(hist, k)
    best, _ = multiotsu_bruteforce(hist, k)
    assert len(cuts) == k - 1 and np.all(np.diff(cuts) > 0)
    assert between_class_score(hist, cuts) == pytest.approx(best, rel=1e-9)


def test_two_peaks_split_between():
    hist = np.zeros(32)
    hist[5] = 100
    hist[25] = 100
    (cut,) = multiotsu_cuts(hist, 2)
    assert 6 <= cut <= 25


def test_quantize_levels_and_mse(rng):
    plane = rng.random((40, 40))
    errs = []
    for k in (2, 3, 4, 6):
        q = quantize_plane(plane, k)
        assert np.unique(q).size <= k
        errs.append(np.mean((q - plane) ** 2))
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_too_few_bins():
    with pytest.raises(InvalidArgument):
        multiotsu_cuts([1, 2], 3)
