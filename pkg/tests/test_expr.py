import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_points.errors import (
    EvalDomainError,
    ExprSyntaxError,
    MissingBindingError,
    UnknownIdentifierError,
)
from conformal_points.expr import (
    differentiate,
    evaluate,
    evaluate_array,
    parse,
    to_string,
)


def ev(source, variables, **binding):
    return evaluate(parse(source, variables), binding)


def test_parse_eval_basic():
    assert ev("sin(u)*v", ["u", "v"], u=math.pi / 2, v=2.0) == pytest.approx(2.0)
    assert ev("exp(0)", []) == 1.0
    assert ev("atan2(1,0)", []) == pytest.approx(math.pi / 2)
    assert ev("2^3^2", []) == 512.0  # right associative
    assert ev("-u^2", ["u"], u=3.0) == -9.0
    assert ev("2*pi", []) == pytest.approx(2 * math.pi)


def test_precedence():
    assert ev("1+2*3", []) == 7.0
    assert ev("2*3^2", []) == 18.0
    assert ev("(1+2)*3", []) == 9.0
    assert ev("6/3/2", []) == 1.0
    assert ev("7-2-3", []) == 2.0


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as exc:
        parse("sin(", ["u"])
    assert exc.value.offset == 4
    with pytest.raises(ExprSyntaxError):
        parse("u +", ["u"])
    with pytest.raises(ExprSyntaxError):
        parse("", ["u"])
    with pytest.raises(ExprSyntaxError):
        parse("u $ v", ["u", "v"])


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("u^2 - w", ["u", "v"])
    assert exc.value.name == "w"
    with pytest.raises(UnknownIdentifierError):
        parse("foo(u)", ["u"])


def test_domain_and_binding_errors():
    with pytest.raises(EvalDomainError):
        ev("log(u)", ["u"], u=-1.0)
    with pytest.raises(EvalDomainError):
        ev("1/u", ["u"], u=0.0)
    with pytest.raises(MissingBindingError):
        ev("u+v", ["u", "v"], u=1.0)


def test_array_evaluation():
    ast = parse("u^2 + sin(v)", ["u", "v"])
    u = np.linspace(0, 1, 5)
    v = np.zeros(5)
    out = evaluate_array(ast, {"u": u, "v": v})
    np.testing.assert_allclose(out, u**2)
    # non-finite values pass through instead of raising
    bad = evaluate_array(parse("log(u)", ["u"]), {"u": np.array([-1.0, 1.0])})
    assert np.isnan(bad[0]) and bad[1] == 0.0


def central_difference(ast, var, binding, h=1e-5):
    up = dict(binding)
    dn = dict(binding)
    up[var] += h
    dn[var] -= h
    return (evaluate(ast, up) - evaluate(ast, dn)) / (2 * h)


def test_derivative_examples():
    assert evaluate(differentiate(parse("sin(u)", ["u"]), "u"), {"u": 0.0}) == 1.0
    assert evaluate(differentiate(parse("u*v", ["u", "v"]), "u"),
                    {"u": 3.0, "v": 5.0}) == 5.0
    # d/du exp(u^2) at 1 -> 2e, checked against the finite-difference oracle
    ast = parse("exp(u^2)", ["u"])
    der = differentiate(ast, "u")
    fd = central_difference(ast, "u", {"u": 1.0})
    sym = evaluate(der, {"u": 1.0})
    assert sym == pytest.approx(fd, rel=1e-6)
    assert sym == pytest.approx(2 * math.e, rel=1e-12)


def test_derivative_general_power_rewrite():
    # non-integer exponent goes through exp(b*log(a))
    ast = parse("u^2.5", ["u"])
    der = differentiate(ast, "u")
    assert evaluate(der, {"u": 2.0}) == pytest.approx(2.5 * 2.0**1.5, rel=1e-12)
    ast2 = parse("u^v", ["u", "v"])
    der2 = differentiate(ast2, "v")
    assert evaluate(der2, {"u": 2.0, "v": 3.0}) == pytest.approx(
        8.0 * math.log(2.0), rel=1e-12)


def test_abs_derivative_flagged_at_evaluation():
    der = differentiate(parse("abs(u)", ["u"]), "u")
    assert evaluate(der, {"u": 2.0}) == 1.0
    assert evaluate(der, {"u": -2.0}) == -1.0
    with pytest.raises(EvalDomainError):
        evaluate(der, {"u": 0.0})


def test_atan2_derivative():
    ast = parse("atan2(v, u)", ["u", "v"])
    for var in ("u", "v"):
        der = differentiate(ast, var)
        b = {"u": 0.7, "v": -1.3}
        assert evaluate(der, b) == pytest.approx(
            central_difference(ast, var, b), rel=1e-8)


# --- random expression generator (domain-safe by construction) -------------

def random_ast(rng, depth, variables):
    """Random expression source that is smooth and finite near the origin."""
    if depth == 0:
        r = rng.integers(0, 3)
        if r == 0:
            return f"{rng.uniform(-2, 2):.6f}"
        return str(rng.choice(variables))
    kind = rng.integers(0, 8)
    a = random_ast(rng, depth - 1, variables)
    b = random_ast(rng, depth - 1, variables)
    if kind == 0:
        return f"({a} + {b})"
    if kind == 1:
        return f"({a} - {b})"
    if kind == 2:
        return f"({a} * {b})"
    if kind == 3:
        return f"({a} / (2.5 + sin({b})))"
    if kind == 4:
        return f"sin({a})"
    if kind == 5:
        return f"cos({a})"
    if kind == 6:
        return f"exp(sin({a}))"
    return f"({a})^{rng.integers(2, 4)}"


def test_roundtrip_print_parse():
    rng = np.random.default_rng(7)
    variables = ["u", "v"]
    for _ in range(40):
        src = random_ast(rng, int(rng.integers(1, 5)), variables)
        ast = parse(src, variables)
        back = parse(to_string(ast), variables)
        for _ in range(100):
            b = {"u": float(rng.uniform(-1, 1)), "v": float(rng.uniform(-1, 1))}
            assert evaluate(ast, b) == pytest.approx(evaluate(back, b), abs=1e-12)


def test_derivative_linearity():
    rng = np.random.default_rng(11)
    variables = ["u", "v"]
    for _ in range(20):
        e1 = parse(random_ast(rng, 3, variables), variables)
        e2 = parse(random_ast(rng, 3, variables), variables)
        d1 = differentiate(e1, "u")
        d2 = differentiate(e2, "u")
        dsum = differentiate(parse(f"({to_string(e1)}) + ({to_string(e2)})",
                                   variables), "u")
        b = {"u": float(rng.uniform(-1, 1)), "v": float(rng.uniform(-1, 1))}
        assert evaluate(dsum, b) == pytest.approx(
            evaluate(d1, b) + evaluate(d2, b), abs=1e-12)


def test_derivative_matches_finite_differences_random():
    rng = np.random.default_rng(3)
    variables = ["u", "v"]
    checked = 0
    for _ in range(60):
        src = random_ast(rng, int(rng.integers(1, 6)), variables)
        ast = parse(src, variables)
        der = differentiate(ast, "u")
        b = {"u": float(rng.uniform(-0.8, 0.8)), "v": float(rng.uniform(-0.8, 0.8))}
        try:
            sym = evaluate(der, b)
            fd = central_difference(ast, "u", b)
        except EvalDomainError:
            continue
        if abs(fd) < 1e-4:  # relative comparison meaningless near zero
            assert sym == pytest.approx(fd, abs=1e-5)
        else:
            assert sym == pytest.approx(fd, rel=1e-6)
        checked += 1
    assert checked > 30


# hypothesis: structural round-trip on generated source strings
_leaf = st.sampled_from(["u", "v", "0.5", "2.0", "1.25"])


def _combine(children):
    return st.builds(
        lambda op, a, b: f"({a} {op} {b})" if op in "+-" else f"({a}{op}{b})",
        st.sampled_from(["+", "-", "*"]), children, children,
    ) | st.builds(lambda f, a: f"{f}({a})", st.sampled_from(["sin", "cos", "exp"]),
                  children)


@given(st.recursive(_leaf, _combine, max_leaves=12))
@settings(max_examples=60, deadline=None)
def test_roundtrip_hypothesis(src):
    ast = parse(src, ["u", "v"])
    again = parse(to_string(ast), ["u", "v"])
    b = {"u": 0.37, "v": -0.61}
    assert evaluate(ast, b) == pytest.approx(evaluate(again, b), abs=1e-12)
