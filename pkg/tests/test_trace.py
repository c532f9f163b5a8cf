import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.errors import ParityError
from backend.modforms.trace import (
    TraceContext,
    dim_cusp,
    dim_new,
    quadratic_roots,
    quadratic_roots_brute,
    trace_form_new,
    trace_full,
    trace_new,
)


def test_level_one_traces():
    ctx = TraceContext.make(1, 12)
    assert dim_cusp(ctx) == 1
    assert trace_full(ctx, 2) == -24
    assert trace_full(ctx, 3) == 252
    assert dim_cusp(TraceContext.make(1, 24)) == 2


@pytest.mark.parametrize("n,value", [(1, 1), (2, -2), (3, -1), (5, 1), (7, -2)])
def test_level_eleven(n, value):
    assert trace_full(TraceContext.make(11, 2), n) == value


def test_old_and_new_dimensions():
    ctx = TraceContext.make(22, 2)
    assert dim_cusp(ctx) == 2
    assert dim_new(ctx) == 0
    assert dim_new(TraceContext.make(23, 2)) == 2
    assert trace_new(TraceContext.make(23, 2), 2) == -1


def test_new_trace_form():
    tr = trace_form_new(TraceContext.make(11, 2))
    assert tr.coefs(5) == [0, 1, -2, -1, 2, 1]
    assert tr.prefix() == "(trnew 11 2 chi:11:1)"


def test_context_validation(chi_minus4):
    with pytest.raises(ParityError):
        TraceContext.make(4, 3)
    with pytest.raises(ValueError):
        TraceContext.make(4, 1, chi_minus4)
    ctx = TraceContext.make(12, 3, chi_minus4)
    assert ctx.chi.modulus == 12
    with pytest.raises(ValueError):
        trace_full(ctx, 0)


@pytest.mark.parametrize("t,n,M", [(0, 0, 64), (2, 1, 81), (0, -4, 2 ** 7 * 3 ** 3), (1, 1, 7 * 49), (4, 4, 1000),
                                   (3, 5, 1), (1, 2, 2 ** 10)])
def test_quadratic_roots_lift_through_prime_powers(t, n, M):
    assert quadratic_roots(t, n, M) == quadratic_roots_brute(t, n, M)
