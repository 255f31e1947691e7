import numpy as np
import pytest

from eqstab.errors import DomainError, SystemDefinitionError
from eqstab.sysdef import BUILTINS, builtin, fd_step, jacobian, parse_system


def test_parse_example2_text():
    s = parse_system("dim 1\nx1' = -sqrt(x1) + 1\ndomain x1 > 0\n")
    assert s.n == 1
    assert s.in_domain([0.5]) and not s.in_domain([0.0])
    assert s.rhs([4.0])[0] == -1.0


def test_parse_example4_text_matches_builtin():
    s = parse_system("dim 3\nx1' = x3\nx2' = (x2 - x3)^2\nx3' = x1 - 1 + x2")
    assert s.to_text() == builtin("example4").to_text().replace("name example4\n", "")


def test_comments_and_blank_lines():
    s = parse_system("# header\n\ndim 1   # one state\nx1' = -x1  # decay\n")
    assert s.rhs([2.0])[0] == -2.0


@pytest.mark.parametrize("text, line", [
    ("dim 2\nx1' = x3\nx2' = 0", 2),
    ("dim 1\nx1 = x1", 2),
    ("dim 1\ndim 1\nx1' = 1", 2),
    ("dim 1\nx1' = 1\nx1' = 2", 3),
    ("dim 1\nx1' = 1\ndomain x2 > 0", 3),
    ("dim 1\nx1' = 1\ndomain x1 ~ 0", 3),
    ("dim x\nx1' = 1", 1),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(SystemDefinitionError) as info:
        parse_system(text)
    assert info.value.line == line


@pytest.mark.parametrize("text", [
    "x1' = 1",
    "dim 2\nx1' = 1",
    "dim 1\nx1' = 1\ndomain x1 > 1\ndomain x1 < 0",
    "dim 1\nx1' = 1\ndomain x1 > 1\ndomain x1 <= 1",
])
def test_structural_errors(text):
    with pytest.raises(SystemDefinitionError):
        parse_system(text)


def test_builtin_jacobians():
    np.testing.assert_array_equal(jacobian(builtin("example3"), [1, 1]), [[-1, 0], [0, -2]])
    np.testing.assert_array_equal(jacobian(builtin("example4"), [1, 0, 0]),
                                  [[0, 0, 1], [0, 0, 0], [1, 1, 0]])


def test_builtin_registry():
    assert set(BUILTINS) == {"example1", "example2", "example3", "example4", "greitzer"}
    with pytest.raises(TypeError):
        builtin("greitzer")
    with pytest.raises(KeyError):
        builtin("example9")
    g = builtin("greitzer", g=0.7)
    assert g.n == 2 and not g.in_domain([0.5, 0.0])


def test_jacobian_outside_domain():
    with pytest.raises(DomainError):
        jacobian(builtin("example2"), [-1.0])
    with pytest.raises(DomainError):
        jacobian(builtin("example2"), [1e-9], method="finite_difference")


def test_fd_step():
    eps = np.finfo(float).eps
    np.testing.assert_allclose(fd_step([0.5, -4.0]), [np.cbrt(eps), 4 * np.cbrt(eps)])


@pytest.mark.parametrize("name, lo, hi", [
    ("example1", [0.05], [10.0]),
    ("example2", [0.05], [10.0]),
    ("example3", [-3.0, -3.0], [3.0, 3.0]),
    ("example4", [-2.0, -2.0, -2.0], [3.0, 3.0, 3.0]),
])
def test_analytic_matches_finite_difference(name, lo, hi):
    s = builtin(name)
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.uniform(lo, hi)
        Ja = jacobian(s, x)
        Jf = jacobian(s, x, method="finite_difference")
        assert np.all(np.abs(Ja - Jf) <= 1e-5 * np.maximum(1.0, np.abs(Ja)))


def test_greitzer_analytic_matches_finite_difference():
    s = builtin("greitzer", g=0.8)
    rng = np.random.default_rng(6)
    for _ in range(100):
        x = rng.uniform([0.0, 0.05], [0.8, 1.0])
        Ja = jacobian(s, x)
        Jf = jacobian(s, x, method="fd")
        assert np.all(np.abs(Ja - Jf) <= 1e-5 * np.maximum(1.0, np.abs(Ja)))


def test_digest_is_stable():
    assert builtin("example3").digest() == builtin("example3").digest()
    assert builtin("example3").digest() != builtin("example4").digest()
