import numpy as np
import pytest

from oracles import reference_importance
from socdse import evaluators as ev
from socdse import importance as imp
from socdse import space as sp


def _grid_space(doc_candidates):
    lines = ["parameters:"]
    for i, cands in enumerate(doc_candidates):
        lines.append(f"- {{name: p{i}, group: g, candidates: {list(cands)}}}")
    return sp.load_space("\n".join(lines) + "\n")


class _FnEvaluator(ev.Evaluator):
    """Deterministic synthetic evaluator from a point-indexed function."""

    def __init__(self, space, fn, d_y):
        self.space = space
        self._fn = fn
        self.descriptor = ev.EvaluatorDescriptor(
            kind="benchmark",
            metric_names=tuple(f"m{i}" for i in range(d_y)))

    def evaluate(self, point):
        return np.asarray(self._fn(self.space.validate(point)), float)


def test_hand_case_two_group_means():
    # one parameter, two trials: means (0,0) and (3,4), C(2,2)=1 -> 5.0
    space = _grid_space([[0, 1]])
    raw = imp.icd_from_trials(space, [(0,), (1,)],
                              np.array([[0.0, 0.0], [3.0, 4.0]]),
                              standardize=False, normalize=False)
    assert abs(raw[0] - 5.0) < 1e-12


def test_constant_metrics_fall_back_to_uniform():
    space = _grid_space([[0, 1], [0, 1], [0, 1]])
    const = _FnEvaluator(space, lambda p: (7.0, 7.0), 2)
    v, _, _ = imp.icd(space, const, 12, seed=0)
    assert np.allclose(v, 1.0 / 3.0)


def test_single_influential_parameter_ranks_first_and_matches_oracle():
    space = _grid_space([[0, 1, 2], [0, 1], [0, 1], [0, 1]])
    influential = _FnEvaluator(
        space, lambda p: (10.0 * p[0], 5.0 * p[0] + 0.01 * p[2]), 2)
    v, points, metrics = imp.icd(space, influential, 40, seed=3)
    assert int(np.argmax(v)) == 0
    raw_ref = reference_importance(4, points, metrics)
    ref = np.asarray(raw_ref) / np.sum(raw_ref)
    assert np.allclose(v, ref, atol=1e-9)


def test_matches_oracle_on_random_metrics():
    space = _grid_space([[0, 1, 2], [0, 1, 2, 3], [0, 1]])
    rng = np.random.default_rng(5)
    points = sp.sample_uniform(space, 25, seed=8)
    metrics = rng.normal(size=(25, 3)) * [100.0, 1.0, 0.01]
    got = imp.icd_from_trials(space, points, metrics)
    raw_ref = reference_importance(3, points, metrics)
    ref = np.asarray(raw_ref) / np.sum(raw_ref)
    assert np.allclose(got, ref, atol=1e-9)


def test_uncovered_parameter_scores_zero_with_warning():
    space = _grid_space([[0, 1], [0, 1]])
    fn = _FnEvaluator(space, lambda p: (float(p[1]),), 1)
    trials = [(0, 0), (0, 1), (0, 0), (0, 1)]  # p0 never varies
    with pytest.warns(UserWarning, match="p0"):
        v, _, _ = imp.icd(space, fn, 4, trial_points=trials)
    assert v[0] == 0.0
    assert abs(v.sum() - 1.0) < 1e-12


def test_rejects_fewer_than_two_trials():
    space = _grid_space([[0, 1]])
    fn = _FnEvaluator(space, lambda p: (1.0,), 1)
    with pytest.raises(ValueError, match="n >= 2"):
        imp.icd(space, fn, 1)


def test_permutation_equivariance():
    space = _grid_space([[0, 1, 2], [0, 1], [0, 1, 2, 3]])
    rng = np.random.default_rng(11)
    points = sp.sample_uniform(space, 30, seed=2)
    metrics = rng.normal(size=(30, 2))
    v = imp.icd_from_trials(space, points, metrics)

    perm = [2, 0, 1]
    perm_space = sp.DesignSpace(
        parameters=tuple(space.parameters[i] for i in perm))
    perm_points = [tuple(p[i] for i in perm) for p in points]
    v_perm = imp.icd_from_trials(perm_space, perm_points, metrics)
    assert np.allclose(v_perm, v[perm], atol=1e-12)


def test_importance_invariant_to_metric_rescaling():
    space = _grid_space([[0, 1, 2], [0, 1], [0, 1, 2, 3]])
    rng = np.random.default_rng(13)
    points = sp.sample_uniform(space, 40, seed=4)
    metrics = rng.normal(size=(40, 3))
    v = imp.icd_from_trials(space, points, metrics)
    scaled = metrics * np.array([1000.0, 1.0, 1.0])
    v_scaled = imp.icd_from_trials(space, points, scaled)
    assert np.allclose(v, v_scaled, atol=1e-9)


def test_prune_threshold_zero_keeps_everything():
    space = sp.table1_space()
    v = np.full(24, 1.0 / 24)
    pruned, mask = imp.prune(space, v, 0.0)
    assert not mask.any()
    assert pruned.cardinality() == space.cardinality()


def test_prune_uniform_importance_below_stock_threshold_fixes_all():
    # uniform 1/24 ~ 0.0417 < 0.07: every parameter is below average
    space = sp.table1_space()
    v = np.full(24, 1.0 / 24)
    pruned, mask = imp.prune(space, v, 0.07)
    assert mask.all()
    assert pruned.cardinality() == 1


def test_prune_even_list_takes_lower_middle():
    space = _grid_space([[4, 8, 16, 32]])
    pruned, mask = imp.prune(space, np.array([0.0]), 0.5)
    assert mask[0]
    assert pruned.parameters[0].candidates == (8,)


def test_prune_is_idempotent():
    space = sp.table1_space()
    rng = np.random.default_rng(7)
    v = imp.normalize_importance(rng.random(24))
    once, mask1 = imp.prune(space, v, 0.05)
    twice, mask2 = imp.prune(once, v, 0.05)
    assert np.array_equal(mask1, mask2)
    assert [p.candidates for p in once.parameters] == \
        [p.candidates for p in twice.parameters]


def test_medium_index_rule():
    assert imp.medium_index(sp.ParameterDef("a", "g", (1,))) == 0
    assert imp.medium_index(sp.ParameterDef("a", "g", (1, 2, 3))) == 1
    assert imp.medium_index(sp.ParameterDef("a", "g", (1, 2, 3, 4))) == 1


def test_transform_uniform_importance_scales_distances():
    space = _grid_space([[0, 1], [0, 1], [0, 1], [0, 1]])
    v = np.full(4, 0.25)
    pool = [(0, 0, 0, 0), (1, 1, 1, 1)]
    icd_space = imp.transform(space, pool, v)
    base = np.linalg.norm(sp.encode(space, pool[0])
                          - sp.encode(space, pool[1]))
    got = np.linalg.norm(icd_space.coords[0] - icd_space.coords[1])
    assert abs(got - base / 4) < 1e-12


def test_transform_zero_weight_hides_parameter():
    space = _grid_space([[0, 1], [0, 1]])
    icd_space = imp.transform(space, [(0, 1), (1, 1)],
                              np.array([1.0, 0.0]))
    assert np.all(icd_space.coords[:, 1] == 0.0)


def test_transform_weighted_two_feature_geometry():
    # with weights (0.9, 0.1) a difference on the light feature shrinks
    # to 0.1 while a difference on the heavy one stays at 0.9
    space = _grid_space([[0, 1], [0, 1]])
    v = np.array([0.9, 0.1])
    icd_space = imp.transform(space, [(0, 0), (0, 1), (1, 0)], v)
    d_light = np.linalg.norm(icd_space.coords[0] - icd_space.coords[1])
    d_heavy = np.linalg.norm(icd_space.coords[0] - icd_space.coords[2])
    assert abs(d_light - 0.1) < 1e-12
    assert abs(d_heavy - 0.9) < 1e-12
    assert d_light < 1.0 < d_heavy + 0.2


def test_transform_preserves_membership():
    space = sp.table1_space()
    pts = sp.sample_uniform(space, 25, seed=19)
    v = imp.normalize_importance(np.arange(1.0, 25.0))
    icd_space = imp.transform(space, pts, v)
    assert set(icd_space.points) <= set(pts)
    assert np.allclose(icd_space.coords,
                       sp.encode_many(space, pts) * v[None, :])


def test_importance_csv_round_trip(tmp_path):
    space = sp.table1_space()
    v = imp.normalize_importance(np.arange(1.0, 25.0))
    path = tmp_path / "importance.csv"
    imp.write_importance_csv(space, v, str(path))
    names, values = imp.read_importance_csv(str(path))
    assert names == space.names
    assert np.allclose(values, v, atol=0)
