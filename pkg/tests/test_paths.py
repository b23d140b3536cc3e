import numpy as np
import pytest

from stochmeasure.errors import DomainError, ValidationError
from stochmeasure.paths import SampledPath, format_columns, read_columns


def test_csv_round_trip_bit_exact(tmp_path):
    p = SampledPath(0.1, 1 / 3, np.random.default_rng(0).normal(size=50))
    p.to_csv(tmp_path / "p.csv")
    q = SampledPath.from_csv(tmp_path / "p.csv")
    assert q.values.tobytes() == p.values.tobytes()
    assert q.dt == pytest.approx(p.dt, rel=1e-12)


def test_values_read_only():
    p = SampledPath(0.0, 1.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        p.values[0] = 5.0


@pytest.mark.parametrize("args", [(0.0, 0.0, [1, 2]), (0.0, 1.0, [1.0]), (0.0, 1.0, [1.0, np.nan])])
def test_invalid_paths(args):
    with pytest.raises(ValidationError):
        SampledPath(*args)


def test_non_uniform_samples():
    with pytest.raises(DomainError):
        SampledPath.from_samples([0.0, 1.0, 2.5], [0, 0, 0])


def test_format_columns():
    assert format_columns(("a", "b"), ([0.1, 2], [3, 4])) == "a,b\n0.10000000000000001,3\n2,4\n"


def test_read_columns_errors(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(DomainError):
        read_columns(tmp_path / "e.csv")
    (tmp_path / "x.csv").write_text("t,v\n1,abc\n")
    with pytest.raises(DomainError):
        read_columns(tmp_path / "x.csv")
