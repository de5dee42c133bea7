import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xor3sdp.fourier import eval_poly, instance_objective
from xor3sdp.instances import (
    Assignment,
    Constraint,
    FormatError,
    Instance,
    Literal,
    Predicate3,
    ValidationError,
    XOR_PLUS,
    XOR_PLUS_MASK,
    evaluate,
    parse,
    random_baseline,
    serialize,
)

from conftest import instances_strategy, make_constraint, random_assignment_for, random_instance


def test_xor_plus_mask_is_product_plus():
    assert XOR_PLUS_MASK == 105
    for t in XOR_PLUS.tuples():
        assert t[0] * t[1] * t[2] == 1
    assert len(XOR_PLUS.tuples()) == 4


class TestEvaluate:
    def test_single_xor_all_plus(self):
        inst = Instance((1, 1, 1), (make_constraint(1, 1, 1),))
        assert evaluate(inst, Assignment((1,), (1,), (1,))) == 1.0

    def test_single_xor_odd_flip(self):
        inst = Instance((1, 1, 1), (make_constraint(1, 1, 1),))
        assert evaluate(inst, Assignment((1,), (1,), (-1,))) == 0.0

    def test_contradictory_pair_always_half(self):
        minus = Predicate3.from_tuples(
            [t for t in Predicate3(255).tuples() if t[0] * t[1] * t[2] == -1]
        )
        inst = Instance(
            (1, 1, 1),
            (make_constraint(1, 1, 1), make_constraint(1, 1, 1, pred=minus)),
        )
        for a in (
            Assignment((1,), (1,), (1,)),
            Assignment((-1,), (1,), (-1,)),
            Assignment((-1,), (-1,), (-1,)),
        ):
            assert evaluate(inst, a) == 0.5

    def test_dimension_mismatch(self):
        inst = Instance((2, 1, 1), (make_constraint(1, 1, 1),))
        with pytest.raises(ValidationError):
            evaluate(inst, Assignment((1,), (1,), (1,)))

    def test_weight_scaling_invariance(self, rng):
        for _ in range(100):
            inst = random_instance(rng, any_pred=True)
            a = random_assignment_for(inst.sizes, rng)
            c = float(rng.integers(1, 50)) / 7.0
            scaled = Instance(
                inst.sizes,
                tuple(
                    Constraint(cc.lits, cc.weight * c, cc.pred) for cc in inst.constraints
                ),
            )
            assert abs(evaluate(inst, a) - evaluate(scaled, a)) <= 1e-12

    def test_folding_consistency(self, rng):
        # flipping one literal's sign together with the assignment bit it reads
        # leaves the value unchanged
        for _ in range(50):
            inst = random_instance(rng, any_pred=True)
            a = random_assignment_for(inst.sizes, rng)
            block = int(rng.integers(1, 4))
            index = int(rng.integers(1, inst.sizes[block - 1] + 1))
            flipped_cons = []
            for c in inst.constraints:
                lits = list(c.lits)
                lit = lits[block - 1]
                if lit.index == index:
                    lits[block - 1] = Literal(lit.block, lit.index, -lit.sign)
                flipped_cons.append(Constraint(tuple(lits), c.weight, c.pred))
            flipped_inst = Instance(inst.sizes, tuple(flipped_cons))
            vals = [list(a.block1), list(a.block2), list(a.block3)]
            vals[block - 1][index - 1] *= -1
            flipped_a = Assignment(*(tuple(v) for v in vals))
            assert evaluate(inst, a) == evaluate(flipped_inst, flipped_a)

    @given(instances_strategy())
    @settings(max_examples=50, deadline=None)
    def test_matches_objective_polynomial(self, inst):
        rng = np.random.default_rng(inst.n_vars)
        poly = instance_objective(inst)
        for _ in range(5):
            a = random_assignment_for(inst.sizes, rng)
            assert abs(evaluate(inst, a) - eval_poly(poly, a)) <= 1e-9


class TestRandomBaseline:
    def test_xor_near_half(self):
        rng = np.random.default_rng(5)
        inst = random_instance(rng, sizes=(4, 4, 4), n_cons=24)
        assert abs(random_baseline(inst, 10**5, seed=1) - 0.5) <= 0.01

    def test_full_predicate_exactly_one(self):
        inst = Instance((1, 1, 1), (make_constraint(1, 1, 1, pred=Predicate3(255)),))
        assert random_baseline(inst, 1000, seed=2) == 1.0

    def test_single_tuple_eighth(self):
        pred = Predicate3.from_tuples([(1, 1, 1)])
        inst = Instance((2, 2, 2), (make_constraint(1, 2, 1, pred=pred),))
        assert abs(random_baseline(inst, 10**5, seed=3) - 0.125) <= 0.01

    @pytest.mark.parametrize("mask,rho", [(XOR_PLUS_MASK, 0.5), (1, 0.125)])
    def test_concentration(self, mask, rho):
        # |mean - rho| <= 4*sqrt(rho(1-rho)/trials) in >= 99% of seeded runs
        pred = Predicate3(mask)
        inst = Instance(
            (3, 3, 3),
            tuple(make_constraint(1 + i % 3, 1 + (i // 3) % 3, 1 + i % 2, pred=pred) for i in range(9)),
        )
        trials = 2000
        bound = 4 * math.sqrt(rho * (1 - rho) / trials)
        failures = sum(
            1
            for seed in range(100)
            if abs(random_baseline(inst, trials, seed) - rho) > bound
        )
        assert failures <= 1

    def test_deterministic_given_seed(self, rng):
        inst = random_instance(rng)
        assert random_baseline(inst, 500, seed=9) == random_baseline(inst, 500, seed=9)

    def test_trials_validation(self, rng):
        with pytest.raises(ValidationError):
            random_baseline(random_instance(rng), 0, seed=1)


class TestTextFormat:
    def test_header_and_one_constraint(self):
        text = "c demo\np mx3 2 2 2 1\n1.0 1 -2 1 0\n"
        inst = parse(text)
        assert inst.sizes == (2, 2, 2)
        assert len(inst.constraints) == 1
        lit2 = inst.constraints[0].lits[1]
        assert (lit2.index, lit2.sign) == (2, -1)

    def test_empty_constraint_list_rejected(self):
        with pytest.raises(FormatError, match="W must be positive"):
            parse("p mx3 1 1 1 0\n")

    def test_round_trip_50_constraints(self, rng):
        inst = random_instance(rng, sizes=(4, 5, 6), n_cons=50, any_pred=True)
        text = serialize(inst)
        again = serialize(parse(text))
        assert text == again

    @given(instances_strategy())
    @settings(max_examples=60, deadline=None)
    def test_round_trip_any(self, inst):
        text = serialize(inst)
        assert serialize(parse(text)) == text
        assert text.endswith("\n") and "\r" not in text

    def test_malformed_header(self):
        with pytest.raises(FormatError) as e:
            parse("p mx3 2 2\n")
        assert e.value.line == 1

    def test_out_of_range_literal(self):
        with pytest.raises(FormatError, match="out of range") as e:
            parse("p mx3 2 2 2 1\n1.0 3 1 1 0\n")
        assert e.value.line == 2

    def test_negative_weight(self):
        with pytest.raises(FormatError, match="negative weight") as e:
            parse("p mx3 2 2 2 1\n-1.0 1 1 1 0\n")
        assert e.value.line == 2

    def test_unknown_predicate(self):
        with pytest.raises(FormatError, match="unknown predicate") as e:
            parse("p mx3 2 2 2 1\n1.0 1 1 1 7\n")
        assert e.value.line == 2

    def test_constraint_count_mismatch(self):
        with pytest.raises(FormatError, match="declares"):
            parse("p mx3 2 2 2 2\n1.0 1 1 1 0\n")

    def test_custom_predicate_round_trip(self):
        text = "p mx3 1 1 1 1\nd pred 1 7\n0.5 1 1 1 1\n"
        inst = parse(text)
        assert inst.constraints[0].pred.mask == 7
        assert serialize(parse(serialize(inst))) == serialize(inst)

    def test_canonical_sorting(self):
        a = make_constraint(2, 1, 1, weight=1.0)
        b = make_constraint(1, 1, 1, weight=2.0)
        t1 = serialize(Instance((2, 1, 1), (a, b)))
        t2 = serialize(Instance((2, 1, 1), (b, a)))
        assert t1 == t2
