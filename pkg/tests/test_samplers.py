import numpy as np
import pytest
from scipy.stats import chi2

from mcbalance.chain import accumulate
from mcbalance.errors import OutOfDomainError
from mcbalance.samplers import (
    MAX_CHAIN_ITERS,
    ProposalSpec,
    mh_step,
    random_state,
    run_chain,
    run_parallel_chains,
    slice_step_univariate,
    sweep,
)
from mcbalance.targets import (
    FunnelSpec,
    FunnelTarget,
    three_state_target,
    two_well_target,
    uniform_target,
)


@pytest.fixture(scope="module")
def line_target():
    return uniform_target(9)


@pytest.fixture(scope="module")
def well():
    return two_well_target(barrier=2.0, width=0.5)


def rng_of(seed):
    return np.random.Generator(np.random.PCG64(seed))


# -- ProposalSpec -------------------------------------------------------------------


def test_proposal_spec_validation():
    with pytest.raises(ValueError):
        ProposalSpec(kind="walk")
    with pytest.raises(ValueError):
        ProposalSpec(kind="cube", width=0.0)
    with pytest.raises(ValueError):
        ProposalSpec(kind="truncnorm", sigma=-1.0)
    with pytest.raises(ValueError):
        ProposalSpec(kind="slice", interval=0.0)
    with pytest.raises(ValueError):
        ProposalSpec(kind="cube", updates_per_iter=0)


def test_cube_cells_floors_half_width(line_target):
    space = line_target.space  # unit cells
    assert ProposalSpec(kind="cube", width=2.0).cube_cells(space) == 1
    assert ProposalSpec(kind="cube", width=5.0).cube_cells(space) == 2
    with pytest.raises(ValueError):
        ProposalSpec(kind="cube", width=1.0).cube_cells(space)


def test_slice_cells_rounds_and_floors_at_one(line_target):
    space = line_target.space
    assert ProposalSpec(kind="slice", interval=3.4).slice_cells(space) == 3
    assert ProposalSpec(kind="slice", interval=0.2).slice_cells(space) == 1


# -- single steps -------------------------------------------------------------------


def test_mh_step_returns_fresh_state(well):
    prop = ProposalSpec(kind="cube", width=2.0)
    state = np.array([4], dtype=np.int64)
    nxt, accepted = mh_step(well, state, prop, rng_of(0))
    assert nxt is not state
    assert isinstance(accepted, bool)
    assert abs(int(nxt[0]) - 4) <= prop.cube_cells(well.space)


def test_mh_step_rejects_slice_proposals(well):
    with pytest.raises(ValueError):
        mh_step(well, np.array([0]), ProposalSpec(kind="slice"), rng_of(0))


def test_slice_step_requires_slice_proposal(well):
    with pytest.raises(ValueError):
        slice_step_univariate(
            well, np.array([0]), 0, ProposalSpec(kind="cube", width=2.0), rng_of(0)
        )
    nxt = slice_step_univariate(
        well, np.array([4]), 0, ProposalSpec(kind="slice", interval=1.0), rng_of(1)
    )
    assert nxt.shape == (1,)


def test_step_validates_state(well):
    prop = ProposalSpec(kind="cube", width=2.0)
    with pytest.raises(OutOfDomainError):
        mh_step(well, np.array([99]), prop, rng_of(0))
    with pytest.raises(OutOfDomainError):
        mh_step(well, np.array([0, 0]), prop, rng_of(0))


def test_sweep_updates_every_coordinate():
    target = FunnelTarget(FunnelSpec(dims=3, bound=4.0, width=0.5))
    prop = ProposalSpec(kind="slice", interval=1.0)
    state = target.start_state()
    seen = set()
    rng = rng_of(5)
    cur = state
    for _ in range(30):
        cur, moves = sweep(target, cur, prop, rng)
        assert moves >= 0
        seen.add(tuple(cur.tolist()))
    assert len(seen) > 3


# -- run_chain ----------------------------------------------------------------------


def test_run_chain_row_zero_is_init(line_target):
    prop = ProposalSpec(kind="cube", width=2.0)
    trace = run_chain(line_target, np.array([7]), prop, n=5, rng=rng_of(3))
    assert len(trace) == 5
    assert trace.states[0, 0] == 7
    assert trace.burn_in == 0


def test_run_chain_n_one_records_only_init(line_target):
    prop = ProposalSpec(kind="cube", width=2.0)
    trace = run_chain(line_target, np.array([2]), prop, n=1, rng=rng_of(3))
    assert len(trace) == 1
    assert trace.meta["accepted"] == 0


def test_run_chain_burn_in_recorded_not_applied(line_target):
    prop = ProposalSpec(kind="cube", width=2.0)
    trace = run_chain(line_target, np.array([0]), prop, n=10, rng=rng_of(4), burn_in=3)
    assert len(trace) == 13
    assert trace.retained().shape == (10, 1)


def test_run_chain_is_deterministic_in_seed(well):
    prop = ProposalSpec(kind="truncnorm", sigma=1.0, updates_per_iter=1)
    a = run_chain(well, np.array([0]), prop, n=200, rng=rng_of(11))
    b = run_chain(well, np.array([0]), prop, n=200, rng=rng_of(11))
    c = run_chain(well, np.array([0]), prop, n=200, rng=rng_of(12))
    np.testing.assert_array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_run_chain_validates_budget(line_target):
    prop = ProposalSpec(kind="cube", width=2.0)
    with pytest.raises(ValueError):
        run_chain(line_target, np.array([0]), prop, n=0, rng=rng_of(0))
    with pytest.raises(ValueError):
        run_chain(
            line_target, np.array([0]), prop, n=MAX_CHAIN_ITERS + 1, rng=rng_of(0)
        )


def test_run_chain_meta_records_sampler(well):
    prop = ProposalSpec(kind="slice", interval=1.0)
    trace = run_chain(well, np.array([2]), prop, n=50, rng=rng_of(9), seed=9)
    assert trace.meta["kind"] == "slice"
    assert trace.meta["seed"] == 9
    assert trace.meta["temperature"] == 1.0


def test_chain_spans_uniform_target(line_target):
    """Long uniform-target chains visit every state at about equal rates."""
    prop = ProposalSpec(kind="cube", width=4.0)
    n = 30_000
    trace = run_chain(line_target, np.array([4]), prop, n=n, rng=rng_of(21))
    counts = accumulate(trace).counts
    assert np.all(counts > 0)
    expected = n / line_target.space.m
    stat = float(((counts - expected) ** 2 / expected).sum())
    # chi-square comparison is approximate for dependent draws; allow slack
    assert stat < 10 * chi2.ppf(0.999, df=line_target.space.m - 1)
    np.testing.assert_allclose(counts / n, 1 / 9, atol=0.02)


def test_three_state_marginal_matches_exact_pi():
    target = three_state_target()
    prop = ProposalSpec(kind="slice", interval=1.0)
    trace = run_chain(target, np.array([1]), prop, n=200_000, rng=rng_of(31))
    freq = accumulate(trace).pi_hat
    np.testing.assert_allclose(freq, [0.25, 0.5, 0.25], atol=0.01)


def test_cube_acceptance_falls_with_width(well):
    cold = well.with_temperature(0.2)

    def rate(width, seed):
        prop = ProposalSpec(kind="cube", width=width)
        tr = run_chain(cold, np.array([1]), prop, n=20_000, rng=rng_of(seed))
        return tr.meta["accepted"] / (len(tr) - 1)

    narrow = rate(1.0, 40)
    wide = rate(6.0, 40)
    assert narrow > wide + 0.05


def test_truncnorm_updates_one_coordinate_per_update():
    target = FunnelTarget(FunnelSpec(dims=4, bound=3.0, width=0.5))
    prop = ProposalSpec(kind="truncnorm", sigma=1.0, updates_per_iter=1)
    state = target.start_state()
    nxt, _ = mh_step(target, state, prop, rng_of(2), coord=2)
    changed = np.nonzero(nxt != state)[0]
    assert len(changed) <= 1
    if len(changed):
        assert changed[0] == 2


# -- parallel chains ----------------------------------------------------------------


def test_parallel_chains_reproducible_and_ordered(well):
    prop = ProposalSpec(kind="cube", width=2.0)
    inits = [np.array([0]), np.array([4]), np.array([8])]
    runs1 = run_parallel_chains(well, inits, prop, n=100, seed=17)
    runs2 = run_parallel_chains(well, inits, prop, n=100, seed=17, max_workers=1)
    assert len(runs1) == 3
    for i, (a, b) in enumerate(zip(runs1, runs2)):
        assert a.meta["chain"] == i
        assert a.states[0, 0] == int(inits[i][0])
        np.testing.assert_array_equal(a.states, b.states)


def test_parallel_chains_differ_across_indices(well):
    prop = ProposalSpec(kind="cube", width=2.0)
    runs = run_parallel_chains(well, [np.array([4])] * 2, prop, n=300, seed=23)
    assert not np.array_equal(runs[0].states, runs[1].states)


def test_random_state_covers_space(line_target):
    rng = rng_of(1)
    states = {int(random_state(line_target.space, rng)[0]) for _ in range(500)}
    assert states == set(range(9))
