import numpy as np
import pytest

from socdse import evaluators as ev
from socdse import pareto as par
from socdse import space as sp
from socdse.evaluators import DatasetError, EvaluationError, UnknownPointError


@pytest.fixture(scope="module")
def soc_space():
    return sp.table1_space()


@pytest.fixture(scope="module")
def analytic(soc_space):
    return ev.AnalyticSocEvaluator(soc_space)


@pytest.fixture(scope="module")
def bench():
    return ev.BenchmarkEvaluator(ev.make_benchmark_space(6, 10))


def test_descriptor_rejects_duplicate_metric_names():
    with pytest.raises(ValueError):
        ev.EvaluatorDescriptor(kind="tabular", metric_names=("a", "a"))


def test_analytic_metrics_are_finite_and_positive(analytic, soc_space):
    pts = sp.sample_uniform(soc_space, 50, seed=1)
    out = analytic.evaluate_batch(pts)
    assert out.shape == (50, 3)
    assert np.all(np.isfinite(out))
    assert np.all(out > 0)


def test_analytic_deterministic_bit_identical(analytic, soc_space):
    pt = sp.sample_uniform(soc_space, 1, seed=9)[0]
    a = analytic.evaluate(pt)
    b = analytic.evaluate(pt)
    assert np.array_equal(a, b)


def test_analytic_mesh_doubling_monotonicity(analytic, soc_space):
    # doubling the mesh strictly reduces latency, strictly grows area
    mesh = soc_space.index_of("Meshrow/col")
    for base in sp.sample_uniform(soc_space, 30, seed=4):
        for idx in range(3):
            lo = list(base)
            hi = list(base)
            lo[mesh] = idx
            hi[mesh] = idx + 1
            m_lo = analytic.evaluate(lo)
            m_hi = analytic.evaluate(hi)
            assert m_hi[0] < m_lo[0], "latency must strictly drop"
            assert m_hi[2] > m_lo[2], "area must strictly grow"


def test_analytic_every_parameter_moves_some_metric(analytic, soc_space):
    base = [1] * 24
    ref = analytic.evaluate(base)
    for i, param in enumerate(soc_space.parameters):
        moved = list(base)
        moved[i] = 0
        assert not np.array_equal(analytic.evaluate(moved), ref), \
            f"{param.name} has no effect"


def test_analytic_front_is_nondegenerate(analytic, soc_space):
    pts = sp.sample_uniform(soc_space, 1000, seed=13)
    metrics = analytic.evaluate_batch(pts)
    front = par.pareto_extract(list(zip(pts, metrics)))
    assert len(front) >= 5


def test_benchmark_all_zero_point(bench):
    # closed form: f1 = 0, g = 1, f2 = 1
    out = bench.evaluate((0,) * 6)
    assert np.allclose(out, [0.0, 1.0], atol=0)


def test_benchmark_matches_closed_form(bench):
    space = bench.space
    rng = np.random.default_rng(2)
    for _ in range(50):
        point = tuple(int(rng.integers(0, 10)) for _ in range(6))
        x = [float(v) for v in space.values(point)]
        g = 1.0 + 9.0 * sum(x[1:]) / 5.0
        expect = [x[0], g * (1.0 - (x[0] / g) ** 0.5)]
        assert np.allclose(bench.evaluate(point), expect, atol=1e-12)


def test_benchmark_reference_front_shape(bench):
    front = bench.reference_front()
    assert front.shape == (10, 2)
    assert front[0, 0] == 0.0 and front[0, 1] == 1.0
    assert front[-1, 0] == 1.0 and abs(front[-1, 1]) < 1e-12


def test_benchmark_rejects_out_of_range_candidates():
    space = sp.load_space(
        "parameters:\n- {name: x1, group: g, candidates: [0.0, 2.0]}\n")
    with pytest.raises(sp.SpaceError, match="x1"):
        ev.BenchmarkEvaluator(space)


def test_batch_empty_and_singleton(bench):
    assert bench.evaluate_batch([]).shape == (0, 2)
    single = bench.evaluate_batch([(1,) * 6])
    assert np.array_equal(single[0], bench.evaluate((1,) * 6))


def test_batch_equals_pointwise_on_100_points(analytic, soc_space):
    pts = sp.sample_uniform(soc_space, 100, seed=21)
    batch = analytic.evaluate_batch(pts)
    for row, pt in zip(batch, pts):
        assert np.array_equal(row, analytic.evaluate(pt))


def test_batch_aggregates_error_indices(soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 3, seed=0)
    path = tmp_path / "tiny.csv"
    ev.write_dataset_csv(soc_space, analytic, pts[:1], str(path))
    tab, _ = ev.load_tabular(soc_space, str(path))
    with pytest.raises(EvaluationError, match=r"\[1\].*\[2\]|2 of 3"):
        tab.evaluate_batch(pts)


def test_tabular_round_trip_exact(soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 20, seed=8)
    path = tmp_path / "data.csv"
    ev.write_dataset_csv(soc_space, analytic, pts, str(path))
    tab, pool = ev.load_tabular(soc_space, str(path))
    assert pool == [tuple(p) for p in dict.fromkeys(pts)]
    for pt in pool:
        assert np.array_equal(tab.evaluate(pt), analytic.evaluate(pt))
    assert tab.descriptor.metric_names == analytic.descriptor.metric_names


def test_tabular_single_row_dataset(soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 1, seed=77)
    path = tmp_path / "one.csv"
    ev.write_dataset_csv(soc_space, analytic, pts, str(path))
    tab, pool = ev.load_tabular(soc_space, str(path))
    assert len(pool) == 1
    front = par.pareto_extract([(pool[0], tab.evaluate(pool[0]))])
    assert front.points == [pool[0]]


def test_tabular_unknown_point_raises(soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 2, seed=31)
    path = tmp_path / "two.csv"
    ev.write_dataset_csv(soc_space, analytic, pts[:1], str(path))
    tab, _ = ev.load_tabular(soc_space, str(path))
    with pytest.raises(UnknownPointError, match="restrict"):
        tab.evaluate(pts[1])


def test_tabular_conflicting_duplicate_rows_name_both_lines(
        soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 2, seed=5)
    path = tmp_path / "dup.csv"
    ev.write_dataset_csv(soc_space, analytic, pts, str(path))
    lines = path.read_text().splitlines()
    doctored = lines[1].rsplit(",", 1)[0] + ",999.0"
    path.write_text("\n".join(lines + [doctored]) + "\n")
    with pytest.raises(DatasetError, match="rows 2 and 4"):
        ev.load_tabular(soc_space, str(path))


def test_tabular_identical_duplicate_rows_collapse(
        soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 2, seed=5)
    path = tmp_path / "dup_same.csv"
    ev.write_dataset_csv(soc_space, analytic, pts, str(path))
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines + [lines[1]]) + "\n")
    _, pool = ev.load_tabular(soc_space, str(path))
    assert len(pool) == 2


def test_tabular_missing_column_rejected(soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 2, seed=5)
    path = tmp_path / "broken.csv"
    ev.write_dataset_csv(soc_space, analytic, pts, str(path))
    lines = path.read_text().splitlines()
    header = lines[0].replace("HostCore", "HastCore")
    path.write_text("\n".join([header] + lines[1:]) + "\n")
    with pytest.raises(DatasetError, match="HostCore"):
        ev.load_tabular(soc_space, str(path))


def test_tabular_non_numeric_metric_rejected(soc_space, analytic, tmp_path):
    pts = sp.sample_uniform(soc_space, 2, seed=5)
    path = tmp_path / "nan.csv"
    ev.write_dataset_csv(soc_space, analytic, pts, str(path))
    lines = path.read_text().splitlines()
    lines[2] = lines[2].rsplit(",", 1)[0] + ",not_a_number"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="non-numeric"):
        ev.load_tabular(soc_space, str(path))
