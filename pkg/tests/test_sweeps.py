"""End-to-end exhaustive sweeps at reduced sizes.

The acceptance suite runs the full-size sweeps; these keep the plumbing
honest at sizes that finish in well under a second each.
"""

from fractions import Fraction

import pytest

from permprod.sweeps import (
    SweepSummary,
    run_all,
    sweep_event_factorization,
    sweep_membership_bounds,
    sweep_prefix_decay,
    sweep_relabel_dichotomy,
    sweep_reversal_symmetry,
    sweep_shared_cycle,
    sweep_small_components,
    sweep_trace_identity,
    sweep_traversal_consistency,
)


def assert_clean(summary: SweepSummary):
    assert summary.violations == 0, summary.detail
    assert summary.ok
    assert summary.cases > 0
    assert summary.examples == []


def test_trace_identity_sweep():
    assert_clean(sweep_trace_identity(5))


def test_traversal_consistency_sweep():
    assert_clean(sweep_traversal_consistency(3))


def test_pair_sweeps_at_n3():
    assert_clean(sweep_shared_cycle(3))
    assert_clean(sweep_reversal_symmetry(3))
    assert_clean(sweep_small_components(3))
    assert_clean(sweep_relabel_dichotomy(3))


def test_event_factorization_sweep():
    assert_clean(sweep_event_factorization(3, start_counts=(1, 2)))


def test_membership_bound_sweeps():
    for summary in sweep_membership_bounds(4, thetas=("1/2", "2")):
        assert_clean(summary)


def test_prefix_decay_sweep():
    assert_clean(
        sweep_prefix_decay(n_values=(4, 5, 6), prefix_lengths=(1,), thetas=("1",))
    )


def test_run_all_structure():
    summaries = run_all(pair_n=3, single_n=4, thetas=("1",))
    suites = [s.suite for s in summaries]
    assert len(suites) == len(set(suites))
    assert "trace-power-identity" in suites
    assert "event-factorization" in suites
    assert "prefix-fixing-decay" in suites
    assert all(s.violations == 0 for s in summaries)


def test_summary_serialization():
    s = sweep_shared_cycle(3)
    d = s.as_json_dict()
    assert d["suite"] == s.suite
    assert d["violations"] == 0
    assert d["ok"] is True


def test_summary_ok_tracks_violations():
    bad = SweepSummary(
        suite="demo", n=3, cases=10, violations=2, detail="", examples=["x"]
    )
    assert not bad.ok
