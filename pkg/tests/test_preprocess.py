"""Binarization and flattening transforms."""

import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from smtopt.errors import NotBinarized, RangeTooWide, UnboundedInteger
from smtopt.model import (
    Constraint,
    Model,
    Objective,
    Origin,
    Sense,
    Var,
    VarKind,
    eval_expr,
)
from smtopt.preprocess import (
    binarize,
    bit_count,
    flatten_binarized,
    flatten_naive,
)

from helpers import cvar, ivar, bvar, lin


def int_box(lo, hi, vid=0, name="x"):
    return Model((ivar(vid, name, lo, hi),),
                 (Constraint(Var(vid), F(lo), F(hi)),),
                 Objective(Sense.MINIMIZE, Var(vid)))


class TestBitCount:
    def test_examples(self):
        assert bit_count(1) == 1
        assert bit_count(2) == 2
        assert bit_count(3) == 3
        assert bit_count(4) == 3
        assert bit_count(7) == 4
        assert bit_count(8) == 4

    @given(st.integers(min_value=1, max_value=10**6))
    def test_matches_log_formula_and_covers_width(self, w):
        expected = 1 + (0 if w == 1 else math.ceil(math.log2(w)))
        assert bit_count(w) == expected
        assert 2 ** bit_count(w) - 1 >= w


class TestBinarize:
    @pytest.mark.parametrize("width", list(range(1, 65)))
    def test_every_value_representable_and_codes_decode_exactly(self, width):
        lo = -3
        m = int_box(lo, lo + width)
        out, bmap = binarize(m)
        lower, bits = bmap.entries[0]
        assert lower == lo
        q = len(bits)
        assert q == bit_count(width)
        reachable = set()
        for code in range(2 ** q):
            a = {b: F((code >> i) & 1) for i, b in enumerate(bits)}
            v = bmap.decode(0, a)
            assert v.denominator == 1
            reachable.add(int(v))
            # x is pinned to the decoded value by the equality constraint,
            # so a code is admissible exactly when v respects x's bounds
            x = out.variables[0]
            in_range = x.lower <= v <= x.upper
            assert in_range == (lo <= v <= lo + width)
        assert set(range(lo, lo + width + 1)) <= reachable

    def test_equality_constraint_ties_x_to_bits(self):
        m = int_box(1, 6)
        out, bmap = binarize(m)
        _, bits = bmap.entries[0]
        eqs = [c for c in out.constraints if c.origin is Origin.BINARIZATION]
        assert len(eqs) == 1
        (eq,) = eqs
        assert eq.lower == 0 and eq.upper == 0
        # x = 4 corresponds to offset 3 = bits (1, 1, 0, ...)
        a = {b: F(0) for b in bits}
        a[bits[0]] = F(1)
        a[bits[1]] = F(1)
        a[0] = bmap.decode(0, a)
        assert a[0] == 4
        assert eval_expr(eq.body, a) == 0

    def test_bits_are_unit_integers_and_named(self):
        m = int_box(2, 9, name="count")
        out, bmap = binarize(m)
        _, bits = bmap.entries[0]
        for i, b in enumerate(bits):
            var = out.variables[b]
            assert var.kind is VarKind.INTEGER
            assert var.name == f"count__b{i + 1}"
            assert (var.lower, var.upper) == (0, 1)
        assert out.variables[0].kind is VarKind.CONTINUOUS

    def test_fixed_variable_gets_equality_and_no_bits(self):
        m = Model((ivar(0, "x", 5, 5), ivar(1, "y", 0, 3)),
                  (Constraint(lin((1, 0), (1, 1)), F(0), None),),
                  Objective(Sense.MINIMIZE, Var(1)))
        out, bmap = binarize(m)
        assert bmap.entries[0] == (F(5), ())
        assert bmap.decode(0, {}) == 5
        assert any(c.lower == 5 and c.upper == 5 and c.body == Var(0)
                   for c in out.constraints
                   if c.origin is Origin.BINARIZATION)

    def test_existing_binary_var_is_its_own_bit(self):
        m = Model((bvar(0, "b"),),
                  (Constraint(Var(0), F(0), None),),
                  Objective(Sense.MINIMIZE, Var(0)))
        out, bmap = binarize(m)
        assert bmap.entries[0] == (0, (0,))
        assert len(out.variables) == 1

    def test_fractional_bounds_tightened_to_integer_hull(self):
        m = Model((ivar(0, "x", F(1, 2), F(7, 2)),),
                  (Constraint(Var(0), F(0), None),),
                  Objective(Sense.MINIMIZE, Var(0)))
        out, bmap = binarize(m)
        lower, bits = bmap.entries[0]
        assert lower == 1
        assert out.variables[0].lower == 1 and out.variables[0].upper == 3
        assert len(bits) == bit_count(2)

    def test_unbounded_integer_rejected(self):
        m = Model((ivar(0, "x", 0, None),),
                  (Constraint(Var(0), F(0), None),),
                  Objective(Sense.MINIMIZE, Var(0)))
        with pytest.raises(UnboundedInteger):
            binarize(m)


class TestFlattenBinarized:
    def test_requires_binary_model(self):
        with pytest.raises(NotBinarized):
            flatten_binarized(int_box(0, 3))

    def test_one_disjunction_per_bit(self):
        out, bmap = binarize(int_box(0, 10))
        flat = flatten_binarized(out)
        _, bits = bmap.entries[0]
        dis = [d for d in flat.disjunctions if d.origin is Origin.FLATTENING]
        assert len(dis) == len(bits)
        for d in dis:
            assert len(d.options) == 2
            vals = sorted((opt.lower, opt.upper) for opt in d.options)
            assert vals == [(F(0), F(0)), (F(1), F(1))]

    def test_vars_become_continuous(self):
        out, _ = binarize(int_box(0, 10))
        flat = flatten_binarized(out)
        assert not flat.has_integer_vars


class TestFlattenNaive:
    def test_disjunction_count_is_width_plus_one(self):
        flat = flatten_naive(int_box(2, 7))
        dis = [d for d in flat.disjunctions if d.origin is Origin.FLATTENING]
        assert len(dis) == 6
        assert not flat.has_integer_vars

    def test_admits_exactly_the_integers(self):
        flat = flatten_naive(int_box(1, 4))

        def admitted(v):
            a = {0: F(v)}
            for d in flat.disjunctions:
                if not any(
                        (o.lower is None or eval_expr(o.body, a) >= o.lower)
                        and (o.upper is None
                             or eval_expr(o.body, a) <= o.upper)
                        for o in d.options):
                    return False
            for c in flat.constraints:
                val = eval_expr(c.body, a)
                if c.lower is not None and val < c.lower:
                    return False
                if c.upper is not None and val > c.upper:
                    return False
            return True

        for v in (1, 2, 3, 4):
            assert admitted(F(v))
        for v in (F(1, 2), F(3, 2), F(5, 2), F(7, 2), F(0), F(5)):
            assert not admitted(v)

    def test_fractional_bounds_use_integer_hull(self):
        m = Model((ivar(0, "x", F(1, 2), F(7, 2)),),
                  (Constraint(Var(0), F(0), None),),
                  Objective(Sense.MINIMIZE, Var(0)))
        flat = flatten_naive(m)
        dis = [d for d in flat.disjunctions if d.origin is Origin.FLATTENING]
        assert len(dis) == 3  # hull [1, 3]

    def test_width_cap(self):
        with pytest.raises(RangeTooWide):
            flatten_naive(int_box(0, 5000))

    @settings(max_examples=30)
    @given(lo=st.integers(-20, 20), width=st.integers(0, 30))
    def test_count_property(self, lo, width):
        flat = flatten_naive(int_box(lo, lo + width))
        dis = [d for d in flat.disjunctions
               if d.origin is Origin.FLATTENING]
        assert len(dis) == width + 1
