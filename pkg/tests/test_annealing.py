"""Cooling schedules, the annealing driver, and exhaustive grid minimisation."""
import numpy as np
import pytest

from mcbalance.annealing import (
    AnnealResult,
    CoolingSchedule,
    anneal,
    grid_search_minimum,
)
from mcbalance.chain import accumulate
from mcbalance.errors import OutOfDomainError
from mcbalance.samplers import ProposalSpec, run_chain
from mcbalance.targets import (
    ChangepointTarget,
    GridSpace,
    TabulatedTarget,
    changepoint_energy,
    simulate_changepoint,
    two_well_target,
    uniform_target,
)


def cube(width):
    return ProposalSpec("cube", width=width)


# -- cooling schedules --------------------------------------------------------------


def test_cooling_schedule_is_geometric():
    sched = CoolingSchedule(t0=50.0, ratio=0.5, levels=6)
    np.testing.assert_allclose(
        sched.temperatures(), [50.0, 25.0, 12.5, 6.25, 3.125, 1.5625]
    )


def test_cooling_schedule_single_level():
    np.testing.assert_allclose(CoolingSchedule(2.0, 0.9, 1).temperatures(), [2.0])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(t0=0.0, ratio=0.5, levels=3),
        dict(t0=-1.0, ratio=0.5, levels=3),
        dict(t0=1.0, ratio=0.0, levels=3),
        dict(t0=1.0, ratio=1.0, levels=3),
        dict(t0=1.0, ratio=1.5, levels=3),
        dict(t0=1.0, ratio=0.5, levels=0),
    ],
)
def test_cooling_schedule_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        CoolingSchedule(**kwargs)


# -- exhaustive minimisation ----------------------------------------------------------


def test_grid_search_minimum_double_well_ties_to_first():
    target = two_well_target(barrier=4.0, width=0.25)
    idx, energy = grid_search_minimum(target)
    # both wells sit exactly on the grid; the tie resolves to v = -1
    assert energy == 0.0
    assert target.space.axis_values(0)[idx] == -1.0


def test_grid_search_minimum_three_state():
    target = TabulatedTarget(
        GridSpace(1, 0.0, 2.0, 1.0), np.array([2.0, 0.5, 1.0])
    )
    assert grid_search_minimum(target) == (1, 0.5)


def test_grid_search_matches_pointwise_changepoint_scan():
    data = simulate_changepoint(4, n_patients=4, n_obs=8, tau_law=(1, 7))
    target = ChangepointTarget(data, width=0.25, bound=3.0)
    idx, energy = grid_search_minimum(target)

    axis = target.space.axis_values(0)
    best = (None, np.inf)
    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            e = changepoint_energy(float(a), float(b), data, bound=3.0)
            if e < best[1]:
                best = (i * axis.shape[0] + j, e)
    assert idx == best[0]
    assert energy == pytest.approx(best[1], rel=1e-10)


# -- annealing driver -----------------------------------------------------------------


def test_anneal_two_state_settles_in_low_well():
    target = TabulatedTarget(GridSpace(1, 0.0, 1.0, 1.0), np.array([0.0, 10.0]))
    res = anneal(
        target,
        CoolingSchedule(5.0, 0.5, 3),
        cube(2.0),
        epsilon=0.5,
        checkpoint_n=20,
        max_iter_per_level=500,
        rng=np.random.default_rng(1),
        init=np.array([1]),
    )
    assert res.best_energy == 0.0
    assert res.best_state.tolist() == [0]
    np.testing.assert_allclose(res.best_values, [0.0])
    assert len(res.levels) == 3


def test_anneal_is_deterministic_given_generator():
    target = two_well_target()

    def run():
        return anneal(
            target,
            CoolingSchedule(4.0, 0.5, 4),
            cube(1.5),
            epsilon=0.2,
            checkpoint_n=50,
            max_iter_per_level=1000,
            rng=np.random.default_rng(7),
            init=np.array([0]),
        )

    a, b = run(), run()
    assert a.best_state.tolist() == b.best_state.tolist()
    assert a.best_energy == b.best_energy
    assert a.final_state.tolist() == b.final_state.tolist()
    assert [lv.iterations for lv in a.levels] == [lv.iterations for lv in b.levels]
    for la, lb in zip(a.levels, b.levels):
        assert [cp.vn for cp in la.series.checkpoints] == [
            cp.vn for cp in lb.series.checkpoints
        ]


def test_anneal_reaches_exact_double_well_minimum():
    target = two_well_target(barrier=4.0, width=0.25)
    res = anneal(
        target,
        CoolingSchedule(4.0, 0.5, 5),
        cube(1.5),
        epsilon=0.2,
        checkpoint_n=50,
        max_iter_per_level=2000,
        rng=np.random.default_rng(11),
        init=np.array([target.space.n_points[0] - 1]),  # start at v = +2
    )
    _, floor = grid_search_minimum(target)
    assert res.best_energy == floor == 0.0
    assert abs(res.best_values[0]) == 1.0


def test_anneal_concentrates_at_cold_temperature():
    # gap of 3 per step from the centre; at T = 0.375 the neighbour weight
    # is e^{-8}, so a post-anneal chain should all but sit on the minimum
    space = GridSpace(1, 0.0, 6.0, 1.0)
    target = TabulatedTarget(space, 3.0 * np.abs(np.arange(7.0) - 3.0))
    sched = CoolingSchedule(3.0, 0.5, 4)
    res = anneal(
        target,
        sched,
        cube(2.0),
        epsilon=0.2,
        checkpoint_n=50,
        max_iter_per_level=2000,
        rng=np.random.default_rng(5),
        init=np.array([0]),
    )
    assert res.best_state.tolist() == [3]

    cold = target.with_temperature(float(sched.temperatures()[-1]))
    trace = run_chain(cold, res.final_state, cube(2.0), 2000, np.random.default_rng(6))
    counts = accumulate(trace)
    assert counts.pi_hat[3] > 0.9


def test_anneal_accepts_per_level_sequences():
    res = anneal(
        two_well_target(),
        CoolingSchedule(2.0, 0.5, 2),
        cube(4.0),
        epsilon=[0.5, 0.25],
        checkpoint_n=25,
        max_iter_per_level=500,
        rng=np.random.default_rng(2),
        widths=[4.0, 2.0],
    )
    assert [lv.width for lv in res.levels] == [4.0, 2.0]
    np.testing.assert_allclose(
        [lv.temperature for lv in res.levels], [2.0, 1.0]
    )


@pytest.mark.parametrize("key, value", [("epsilon", [0.1]), ("widths", [1.0])])
def test_anneal_rejects_wrong_length_sequences(key, value):
    kwargs = dict(
        epsilon=0.1,
        checkpoint_n=10,
        max_iter_per_level=100,
        rng=np.random.default_rng(0),
    )
    kwargs[key] = value
    with pytest.raises(ValueError, match="per level"):
        anneal(two_well_target(), CoolingSchedule(2.0, 0.5, 3), cube(4.0), **kwargs)


def test_anneal_validates_inputs():
    target = two_well_target()
    sched = CoolingSchedule(2.0, 0.5, 2)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        anneal(target, sched, cube(4.0), epsilon=0.1, checkpoint_n=0, rng=rng)
    with pytest.raises(ValueError):
        anneal(
            target, sched, cube(4.0), epsilon=0.1, checkpoint_n=5,
            max_iter_per_level=0, rng=rng,
        )
    with pytest.raises(ValueError):
        anneal(target, sched, cube(4.0), epsilon=0.0, checkpoint_n=5, rng=rng)
    with pytest.raises(OutOfDomainError):
        anneal(
            target, sched, cube(4.0), epsilon=0.1, checkpoint_n=5, rng=rng,
            init=np.array([99]),
        )


def test_anneal_flags_level_that_exhausts_its_budget():
    # a single checkpoint can never satisfy the two-point monitor
    res = anneal(
        uniform_target(4),
        CoolingSchedule(1.0, 0.5, 1),
        cube(2.0),
        epsilon=0.5,
        checkpoint_n=30,
        max_iter_per_level=30,
        rng=np.random.default_rng(3),
    )
    lv = res.levels[0]
    assert not lv.equilibrated
    assert lv.iterations == 30
    assert len(lv.series.checkpoints) == 1
    assert lv.series.checkpoints[-1].decision == "continue"


def test_anneal_equilibrates_quickly_on_flat_target():
    res = anneal(
        uniform_target(4),
        CoolingSchedule(1.0, 0.5, 2),
        cube(2.0),
        epsilon=0.9,
        checkpoint_n=25,
        max_iter_per_level=5000,
        rng=np.random.default_rng(4),
    )
    for lv in res.levels:
        assert lv.equilibrated
        assert lv.iterations < 5000
        assert lv.series.checkpoints[-1].decision == "stop"
    assert res.total_iterations == sum(lv.iterations for lv in res.levels)


def test_anneal_records_initial_state_as_best_candidate():
    target = two_well_target(barrier=4.0, width=0.25)
    argmin, floor = grid_search_minimum(target)
    res = anneal(
        target,
        CoolingSchedule(50.0, 0.5, 1),  # hot enough to wander anywhere
        cube(4.0),
        epsilon=0.9,
        checkpoint_n=5,
        max_iter_per_level=5,
        rng=np.random.default_rng(8),
        init=np.array([argmin]),
    )
    assert res.best_energy == floor


def test_anneal_level_reports_carry_acceptance_counts():
    res = anneal(
        two_well_target(),
        CoolingSchedule(2.0, 0.5, 2),
        cube(1.5),
        epsilon=0.3,
        checkpoint_n=25,
        max_iter_per_level=500,
        rng=np.random.default_rng(9),
    )
    for lv in res.levels:
        assert 0 <= lv.accepted <= lv.iterations
    assert isinstance(res, AnnealResult)
    np.testing.assert_allclose(
        res.best_values, res.best_state * 0.25 - 2.0  # values on the [-2, 2] grid
    )
