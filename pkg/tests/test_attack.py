import json

import numpy as np
import pytest

from hhw_pir.attack import drop_block, rank_profile, recover_index
from hhw_pir.errors import DimensionMismatch
from hhw_pir.fields import build_tower
from hhw_pir.linalg import ExtMatrix, change_basis, fq_rank, rank_fq
from hhw_pir.params import SchemeParams
from hhw_pir.scheme import generate_query

from .oracles import subfield_rank_oracle


def test_drop_block_partitions_rows(tight_params, tight_tower, rng):
    params = tight_params
    query, _ = generate_query(params, tight_tower, 2, rng)
    d = params.delta
    for j in range(1, params.m + 1):
        kept = drop_block(query, j, d)
        assert kept.shape == ((params.m - 1) * d, params.n)
        lo = (j - 1) * d
        want = np.delete(query.matrix.data, slice(lo, lo + d), axis=0)
        assert np.array_equal(kept.data, want)
    with pytest.raises(DimensionMismatch):
        drop_block(query, 0, d)
    with pytest.raises(DimensionMismatch):
        drop_block(query, params.m + 1, d)
    with pytest.raises(DimensionMismatch):
        drop_block(query, 1, 5)  # 5 does not divide the 12 query rows


def test_rank_profile_matches_naive_oracle(tight_params, tight_tower, rng):
    query, _ = generate_query(tight_params, tight_tower, 4, rng)
    profile = rank_profile(query, tight_params, tight_tower)
    for j in range(1, tight_params.m + 1):
        kept = drop_block(query, j, tight_params.delta)
        assert profile[j - 1] == subfield_rank_oracle(kept.data, tight_tower.fq)


def test_rank_profile_validates_shape(tight_params, tight_tower, rng):
    short = ExtMatrix.random(tight_tower, tight_params.block_rows - 1, tight_params.n, rng)
    with pytest.raises(DimensionMismatch):
        rank_profile(short, tight_params, tight_tower)
    other = build_tower(3, 1, 2)
    foreign = ExtMatrix.random(other, tight_params.block_rows, tight_params.n, rng)
    with pytest.raises(DimensionMismatch):
        rank_profile(foreign, tight_params, tight_tower)


def test_recovery_at_default_params(preset_params, preset_tower, rng):
    """The scan names the planted index for every target position."""
    params, tower = preset_params, preset_tower
    for target in range(1, params.m + 1):
        query, _ = generate_query(params, tower, target, rng)
        report = recover_index(query, params, tower)
        assert report.recovered_index == target
        assert report.failure_reason is None
        assert report.below_threshold == [target]
        assert report.fallback_used is False
        # deleting the target block hides the full selector rank
        assert report.rank_profile[target - 1] <= params.rank_threshold
        others = [r for j, r in enumerate(report.rank_profile) if j != target - 1]
        assert all(r > params.rank_threshold for r in others)


def test_default_params_profile_shape(preset_params, preset_tower, rng):
    # at the default point every non-target deletion keeps full subfield rank
    params, tower = preset_params, preset_tower
    query, _ = generate_query(params, tower, 3, rng)
    profile = rank_profile(query, params, tower)
    assert profile[2] == params.rank_threshold
    full = min((params.m - 1) * params.delta, params.n * params.s)
    assert all(r == full for j, r in enumerate(profile) if j != 2)


def test_attack_needs_no_basis_knowledge(preset_params, preset_tower, rng):
    """Re-expressing every entry in a random basis leaves the scan unchanged."""
    params, tower = preset_params, preset_tower
    fq = tower.fq
    query, _ = generate_query(params, tower, 6, rng)
    while True:
        transform = fq.rand(rng, (tower.s, tower.s))
        if fq_rank(transform, fq) == tower.s:
            break
    disguised = change_basis(query.matrix, transform)
    assert rank_profile(disguised, params, tower) == rank_profile(query, params, tower)
    assert recover_index(disguised, params, tower).recovered_index == 6


# -- the rank identities behind the threshold ------------------------------------------


def test_deleted_rank_identity_exact(tight_params, tight_tower, rng):
    """rank(Q minus block j) = delta + rank(D+E minus blocks i and j), always.

    The selector block contributes exactly delta independent dimensions on
    top of the codeword-plus-mask rows outside BOTH block i (whose D+E
    rows ride along with the selector) and block j.  This version of the
    identity has no failure probability; the commonly quoted form keeps
    block i's D+E rows on the right-hand side and holds only generically.
    """
    params, tower = tight_params, tight_tower
    d = params.delta
    for trial in range(40):
        target = int(rng.integers(1, params.m + 1))
        query, secrets = generate_query(params, tower, target, rng)
        layers = secrets.codeword_part + secrets.mask_part
        for j in range(1, params.m + 1):
            if j == target:
                continue
            lhs = rank_fq(drop_block(query, j, d))
            both_dropped = drop_block(drop_block(layers, max(j, target), d), min(j, target), d)
            assert lhs == d + rank_fq(both_dropped)


def test_deleted_rank_generic_form_at_default(preset_params, preset_tower, rng):
    # away from tiny parameters the single-deletion form agrees with the scan
    params, tower = preset_params, preset_tower
    d = params.delta
    for trial in range(5):
        target = int(rng.integers(1, params.m + 1))
        query, secrets = generate_query(params, tower, target, rng)
        layers = secrets.codeword_part + secrets.mask_part
        for j in range(1, params.m + 1):
            if j == target:
                continue
            lhs = rank_fq(drop_block(query, j, d))
            assert lhs == d + rank_fq(drop_block(layers, j, d))


def test_target_deletion_rank_never_exceeds_threshold(tight_params, tight_tower, rng):
    # the inequality direction that never fails: deleting the true target
    # always lands at or below the threshold
    params, tower = tight_params, tight_tower
    for _ in range(50):
        target = int(rng.integers(1, params.m + 1))
        query, _ = generate_query(params, tower, target, rng)
        deleted = drop_block(query, target, params.delta)
        assert rank_fq(deleted) <= params.rank_threshold


# -- degenerate scans --------------------------------------------------------------


def test_single_file_scan_is_trivial(micro_params, micro_tower, rng):
    query, _ = generate_query(micro_params, micro_tower, 1, rng)
    report = recover_index(query, micro_params, micro_tower)
    # deleting the only block leaves an empty matrix of rank 0
    assert report.rank_profile == [0]
    assert report.recovered_index == 1


def test_all_zero_query_is_ambiguous(tight_params, tight_tower):
    params = tight_params
    zero = ExtMatrix.zeros(tight_tower, params.block_rows, params.n)
    report = recover_index(zero, params, tight_tower)
    assert report.recovered_index is None
    assert report.failure_reason == "ambiguous"
    assert report.below_threshold == list(range(1, params.m + 1))


def test_fallback_argmin_breaks_ties(tight_params, tight_tower):
    params = tight_params
    zero = ExtMatrix.zeros(tight_tower, params.block_rows, params.n)
    report = recover_index(zero, params, tight_tower, fallback_argmin=True)
    assert report.fallback_used is True
    assert report.recovered_index == 1  # lowest index on ties
    assert report.failure_reason is None


def test_no_candidate_scan(rng):
    # a uniform random matrix almost surely keeps every deletion above the
    # threshold, leaving the candidate list empty
    params = SchemeParams(p=2, e=1, s=2, v=1, n=6, k=1, m=4, L=1)
    tower = build_tower(2, 1, 2)
    for _ in range(10):
        noise = ExtMatrix.random(tower, params.block_rows, params.n, rng)
        report = recover_index(noise, params, tower)
        if report.failure_reason == "no_candidate":
            assert report.below_threshold == []
            assert report.recovered_index is None
            break
    else:
        pytest.fail("uniform noise never produced an empty candidate list")


def test_report_serialises(tight_params, tight_tower, rng):
    query, _ = generate_query(tight_params, tight_tower, 5, rng)
    report = recover_index(query, tight_params, tight_tower)
    blob = json.loads(report.to_json())
    assert blob["recovered_index"] == report.recovered_index
    assert blob["rank_profile"] == report.rank_profile
    assert blob["threshold"] == tight_params.rank_threshold
    assert blob["candidates"] == report.below_threshold
    assert blob["elapsed_ms"] >= 0
