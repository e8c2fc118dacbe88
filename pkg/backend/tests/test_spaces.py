from fractions import Fraction
from pathlib import Path

import pytest

from app.core.errors import DomainError
from app.services.spaces import (
    CONSTANT_ONE,
    MODEL_K,
    MODEL_L,
    AffineFunction,
    IndicatorFunction,
    PowerFunction,
    Side,
    TabulatedFunction,
    load_table,
    model_point,
    parse_test_function,
    sample,
)


def test_model_point_examples() -> None:
    assert model_point(Side.K, 2, 3) == Fraction(1, 6)
    assert model_point("L", 3, 0) == Fraction(1, 4)
    assert model_point("K", 1, 0) == Fraction(1, 1)


def test_model_point_rejects_bad_indices() -> None:
    with pytest.raises(DomainError):
        model_point("K", 2, 4)
    with pytest.raises(DomainError):
        model_point("L", 0, 0)


@pytest.mark.parametrize("model", [MODEL_K, MODEL_L])
def test_blocks_tile_the_model_points(model) -> None:
    seen = []
    for n in range(1, 7):
        for idx, x in enumerate(model.block(n)):
            assert model.locate(x) == (n, idx)
            seen.append(x.denominator)
    assert seen == list(range(1, len(seen) + 1))


@pytest.mark.parametrize("model", [MODEL_K, MODEL_L])
def test_blocks_are_contiguous_and_decreasing_up_to_twenty(model) -> None:
    assert model.offset(1) == 0
    for n in range(1, 21):
        size = model.block_size(n)
        first, last = model.point(n, 0), model.point(n, size - 1)
        assert model.offset(n + 1) == model.offset(n) + size
        assert first == Fraction(1, model.offset(n) + 1)
        assert first > last > model.point(n + 1, 0)
        assert model.locate(first) == (n, 0)
        assert model.locate(last) == (n, size - 1)


def test_locate_rejects_non_model_points() -> None:
    assert MODEL_K.locate(Fraction(0)) is None
    assert MODEL_K.locate(Fraction(2, 5)) is None


def test_isolation_radius_halves_the_gap() -> None:
    assert MODEL_K.isolation_radius(Fraction(1, 3)) == Fraction(1, 24)
    with pytest.raises(DomainError):
        MODEL_L.isolation_radius(Fraction(2, 3))


def test_parse_test_function_kinds() -> None:
    assert parse_test_function("pow:2")(Fraction(1, 2)) == Fraction(1, 4)
    assert parse_test_function("affine:1/2,1")(Fraction(1, 3)) == Fraction(7, 6)
    indicator = parse_test_function("indicator:1/3")
    assert indicator(Fraction(1, 4)) == 1
    assert indicator(Fraction(1, 2)) == 0
    assert indicator.limit_value == 1


@pytest.mark.parametrize("spec", ["sin:1", "pow:x", "affine:1", "indicator:"])
def test_parse_test_function_rejects_bad_specs(spec: str) -> None:
    with pytest.raises(DomainError):
        parse_test_function(spec)


def test_load_table(tmp_path: Path) -> None:
    path = tmp_path / "f.csv"
    path.write_text("point,value\n0,1/2\n1/3,1\n1/4,3/4\n", encoding="utf-8")

    f = load_table(path, modulus=Fraction(2))

    assert f(Fraction(1, 3)) == 1
    assert f(Fraction(1, 4)) == Fraction(3, 4)
    assert f(Fraction(1, 7)) == Fraction(1, 2)
    assert f.limit_value == Fraction(1, 2)
    assert f.continuity_violations([Fraction(1, 3), Fraction(1, 4)]) == []
    assert parse_test_function(f"table:@{path},2")(Fraction(1, 4)) == Fraction(3, 4)


def test_load_table_missing_file(tmp_path: Path) -> None:
    with pytest.raises(DomainError):
        load_table(tmp_path / "absent.csv")


def test_continuity_certificates() -> None:
    points = MODEL_K.block(3)
    assert PowerFunction(2).continuity_violations(points) == []
    assert AffineFunction(Fraction(-3), Fraction(1)).continuity_violations(points) == []
    assert IndicatorFunction(Fraction(1, 5)).continuity_violations(points) == []
    jumpy = TabulatedFunction(table={Fraction(1, 7): Fraction(1)}, modulus=Fraction(1))
    assert jumpy.continuity_violations(points) == [Fraction(1, 7)]


def test_sample_restricts_to_a_block() -> None:
    sampled, sup = sample(PowerFunction(1), "K", 2)
    assert sampled.vector() == [Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(1, 6)]
    assert sup == Fraction(1, 3)

    ones, sup_one = sample(CONSTANT_ONE, Side.L, 3)
    assert ones.vector() == [Fraction(1)] * 3
    assert sup_one == 1


@pytest.mark.parametrize(
    "content",
    [
        "x,value\n1/3,1\n",
        "point,value\n1/3\n",
        "point,value\n1/3,one\n",
    ],
)
def test_load_table_rejects_malformed_csv(tmp_path: Path, content: str) -> None:
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(DomainError):
        load_table(path)


def test_load_table_rejects_non_utf8(tmp_path: Path) -> None:
    path = tmp_path / "latin.csv"
    path.write_bytes("point,value\n1/3,\xe9\n".encode("latin-1"))
    with pytest.raises(DomainError):
        load_table(path)


def test_sample_enforces_the_table_certificate(tmp_path: Path) -> None:
    path = tmp_path / "jumpy.csv"
    path.write_text("point,value\n0,0\n1/7,1\n", encoding="utf-8")

    with pytest.raises(DomainError):
        sample(load_table(path, modulus=Fraction(1, 1000)), "K", 3)
    sampled, sup = sample(load_table(path, modulus=Fraction(7)), "K", 3)
    assert sup == 1
