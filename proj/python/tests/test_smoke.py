import math

import pytest

import bergman as bg


def test_version():
    assert bg.__version__ == "0.1.0"


def test_fock_kernel_matches_closed_form():
    g = bg.ModelGeometry.fock([1.0])
    for k in (8, 16):
        K = bg.BergmanKernel(g, k)
        assert K.value(0.0) == pytest.approx(k / math.pi, rel=1e-8)
        assert K.offdiag_modulus(0.0, 0.3) == pytest.approx(k / math.pi * math.exp(-k * 0.09), rel=1e-10)
    assert bg.closed_form_kernel(g, 8, 0.2) == pytest.approx(8 / math.pi, rel=1e-12)
    assert abs(bg.eikonal_residual(g, 2, 0.1, 0.4 + 0.2j)) < 1e-13


def test_sphere_coefficients_and_kernel():
    g = bg.ModelGeometry.cp1_fs()
    c = bg.coefficient_set(g, 0.3 + 0.1j)
    assert c["b0"] == pytest.approx(1 / (2 * math.pi), abs=1e-6)
    assert c["b1"] == pytest.approx(1 / (2 * math.pi), abs=1e-6)
    assert abs(c["b2"]) < 1e-6
    K = bg.BergmanKernel(g, 12)
    assert K.value(0.5) == pytest.approx(13 / (2 * math.pi), rel=1e-8)


def test_curvature_report():
    rep = bg.curvature_report(bg.ModelGeometry.fock([1.0, -0.5]), [0.0, 0.0])
    assert rep["stratum"] == "M(1)"
    assert rep["omega"] is None
    assert sorted(rep["eigenvalues"]) == pytest.approx([-1.0, 2.0])


def test_expansion_fit():
    fit = bg.expansion_fit(bg.ModelGeometry.cp1_fs(), [10, 20, 30, 40, 50], 0.2)
    for a, b in zip(fit["fitted_b"], fit["predicted_b"]):
        assert a == pytest.approx(b, abs=1e-6)


def test_heat():
    assert bg.heat_trace_density([0.0], 2.0, 0) == pytest.approx(1 / (4 * math.pi), rel=1e-15)
    e = math.e
    assert bg.heat_constant_C() == pytest.approx(e / (e - 1), abs=1e-6)
    b = bg.degeneracy_bound([0.01], 10.0, 0)
    assert b["iota"] == [0]


def test_morse():
    assert bg.morse_integral(bg.ModelGeometry.cp1_fs(), 0) == pytest.approx(1.0, abs=1e-6)
    s = bg.strata_integrals(bg.ModelGeometry.torus(0.2 + 1.1j, 2))
    assert s["values"][0] == pytest.approx(2.0, rel=1e-12)
    assert bg.exact_dims(bg.ModelGeometry.cp1_fs(-1), 10) == [0, 9]
    assert bg.exact_dims(bg.ModelGeometry.fock([1.0]), 3) is None
    chk = bg.strong_morse_check(bg.ModelGeometry.cp1_fs(), 0, 20)
    assert chk["margins"][0]["margin"] == pytest.approx(1.0, abs=1e-5)
    v = bg.vanishing_check(bg.ModelGeometry.cp1_fs(-1), 1, [40])
    assert abs(v["rows"][0]["ratio"] - 1) < 0.05


def test_errors_carry_kind():
    with pytest.raises(bg.BergmanError, match="UnsupportedFamily"):
        bg.strata_integrals(bg.ModelGeometry.fock([1.0]))
    with pytest.raises(bg.BergmanError, match="InvalidArgument"):
        bg.ModelGeometry.torus(1.0 + 0j, 1)
    with pytest.raises(bg.BergmanError, match="ParseError"):
        bg.ModelGeometry.chart_expression(1, "abs(z)", ["identity"])
