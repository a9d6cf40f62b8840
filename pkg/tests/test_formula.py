import pytest

from kdtli import parse_formula
from kdtli.errors import FormulaError


@pytest.mark.parametrize(
    "formula,expected,tol",
    [
        ("H2O", 18.015, 0.001),
        ("C60", 720.66, 0.01),
        ("C30H12F30N2O4", 1034.4, 0.1),
        ("CH4", 16.043, 0.001),
    ],
)
def test_known_masses(formula, expected, tol):
    assert parse_formula(formula) == pytest.approx(expected, abs=tol)


def test_element_order_is_irrelevant_bitwise():
    assert parse_formula("C2H6") == parse_formula("H6C2")
    assert parse_formula("C30H12F30N2O4") == parse_formula("F30O4N2C30H12")


def test_repeated_element_accumulates():
    assert parse_formula("CH3CH3") == parse_formula("C2H6")


def test_single_atoms_default_to_count_one():
    assert parse_formula("HCl") == pytest.approx(parse_formula("H1Cl1"))


@pytest.mark.parametrize("bad", ["", "  ", "Xx12", "C-3", "h2o", "C0", "C3Q"])
def test_rejects_malformed_formulas(bad):
    with pytest.raises(FormulaError):
        parse_formula(bad)
