import random

import pytest

from conftest import ALL_MODES, TEST_STEP_LIMIT
from vshape.exceptions import (
    ArityError,
    MatchFailure,
    NotAFunction,
    PrimopTypeError,
    StepLimitExceeded,
    UndefinedGlobal,
)
from vshape.models import Mode
from vshape.schemas import Config
from vshape.services.lang import PCtor, PInt, PVar, PWild, parse
from vshape.services.machine import Machine, evaluate, match_pattern, prepare
from vshape.services.tables import Runtime, seed_all_fields
from vshape.services.values import Boxed, checksum, construct, show, structural_eq

REVERSE_100 = """
(define (range-acc i acc) (if (< i 1) acc (range-acc (- i 1) (Cons i acc))))
(define (rev xs acc)
  (match xs
    ((Nil) acc)
    ((Cons h t) (rev t (Cons h acc)))))
(rev (range-acc 100 (Nil)) (Nil))
"""


def _list_text(items):
    return "".join(f"Cons[{item}, " for item in items) + "Nil[]" + "]" * len(items)


def test_integer_program(run_program):
    value, rt, machine = run_program("42")
    assert value == 42
    assert rt.counters.objects_allocated == 0


def test_match_binds_fields(run_program):
    value, rt, _ = run_program("(match (Pair 1 2) ((Pair a b) a))")
    assert value == 1
    assert rt.counters.field_reads == 2
    assert run_program("(match (Cons 1 (Nil)) ((Cons h t) h))")[0] == 1


def test_closures_and_arithmetic(run_program):
    value, _, _ = run_program(
        """
        (define (compose f g) (lambda (x) (f (g x))))
        (define (twice f) (compose f f))
        ((twice (lambda (n) (* n 3))) (- 10 3))
        """
    )
    assert value == 63
    closure, _, _ = run_program("(lambda (x y) x)")
    assert show(closure) == "<closure/2>"


@pytest.mark.parametrize("mode", ALL_MODES)
def test_reverse_under_every_mode(run_program, mode):
    value, _, _ = run_program(REVERSE_100, mode=mode)
    assert show(value) == _list_text(range(100, 0, -1))


def test_tail_calls_do_not_grow_the_stack(run_program):
    value, _, machine = run_program(
        "(define (count n) (if (= n 0) 0 (count (- n 1)))) (count 1000000)"
    )
    assert value == 0
    assert machine.peak_depth == 0


def test_deep_non_tail_recursion(run_program):
    value, _, machine = run_program(
        """
        (define (range-acc i acc) (if (< i 1) acc (range-acc (- i 1) (Cons i acc))))
        (define (len xs) (match xs ((Nil) 0) ((Cons h t) (+ 1 (len t)))))
        (len (range-acc 50000 (Nil)))
        """
    )
    assert value == 50_000
    # 원소마다 primop-right 프레임 하나
    assert machine.peak_depth == 50_000


def test_deeply_nested_literals(run_program):
    depth = 1000
    value, _, _ = run_program("(Cons 1 " * depth + "(Nil)" + ")" * depth)
    assert show(value) == _list_text([1] * depth)
    total, _, _ = run_program("(+ 1 " * depth + "0" + ")" * depth)
    assert total == depth


def test_comparisons_return_shared_booleans(run_program):
    value, rt, _ = run_program("(= 1 1)")
    assert show(value) == "True[]"
    assert rt.counters.objects_allocated == 0

    value, rt, _ = run_program("(Pair (< 2 1) (< 3 1))")
    assert show(value) == "Pair[False[], False[]]"
    first, second = value.storage
    assert first is second


@pytest.mark.parametrize(
    "text, expected",
    [
        ("(if (< 1 2) 10 20)", 10),
        ("(if (= 1 2) 10 20)", 20),
        ("(if 0 10 20)", 10),
        ("(if (Nil) 10 20)", 10),
        ("(if (False) 10 20)", 20),
    ],
)
def test_only_false_is_false(run_program, text, expected):
    value, _, _ = run_program(text)
    assert value == expected


def test_integer_patterns(run_program):
    value, _, _ = run_program("(match (+ 1 2) (2 20) (3 30) (_ 0))")
    assert value == 30


def test_definitions_are_evaluated_in_order(run_program):
    value, _, machine = run_program("(define a 2) (define b (* a 5)) (+ a b)")
    assert value == 12
    assert set(machine.globals) == {"a", "b"}


def test_match_pattern_on_inlined_chunk():
    rt = Runtime(Config(mode=Mode.MANUAL))
    cons = rt.registry.intern_class("Cons", 2)
    nil = rt.registry.intern_class("Nil", 0)
    seed_all_fields(rt, rt.registry.classes)
    value = construct(rt, nil, [])
    for item in range(6, 0, -1):
        value = construct(rt, cons, [item, value])
    assert value.shape.width == 7

    env = match_pattern(rt, PCtor("Cons", (PVar("h"), PVar("t")), cons), value, None)
    assert env.bindings["h"] == 1
    tail = env.bindings["t"]
    assert tail.shape is value.shape.children[1]
    assert tail.storage == value.storage[1:]
    assert rt.counters.reifications == 1

    assert match_pattern(rt, PCtor("Nil", (), nil), value, None) is None
    # cls가 해석되지 않은 패턴도 이름/arity로 비교
    assert match_pattern(rt, PCtor("Cons", (PWild(), PWild())), value, None) is not None
    assert match_pattern(rt, PCtor("Cons", (PInt(2), PWild()), cons), value, None) is None


def test_match_pattern_primitives(rt):
    assert match_pattern(rt, PWild(), 5, None) is not None
    assert match_pattern(rt, PInt(3), 3, None) is not None
    assert match_pattern(rt, PInt(3), 4, None) is None
    nil = construct(rt, rt.registry.intern_class("Nil", 0), [])
    assert match_pattern(rt, PInt(0), nil, None) is None
    assert match_pattern(rt, PVar("x"), nil, None).bindings == {"x": nil}


@pytest.mark.parametrize(
    "text, error",
    [
        ("(match 5 ((Nil) 0))", MatchFailure),
        ("(1 2)", NotAFunction),
        ("((Nil) 2)", NotAFunction),
        ("(+ (Nil) 1)", PrimopTypeError),
        ("(< 1 (lambda (x) x))", PrimopTypeError),
        ("((lambda (x) x) 1 2)", ArityError),
        ("(define a b) (define b 1) a", UndefinedGlobal),
    ],
)
def test_runtime_errors(run_program, text, error):
    with pytest.raises(error) as exc_info:
        run_program(text)
    assert exc_info.value.exit_code == 1


def test_match_failure_message(run_program):
    with pytest.raises(MatchFailure) as exc_info:
        run_program("\n  (match (Pair 1 2) ((Nil) 0))")
    message = str(exc_info.value)
    assert message.startswith("2:3: ")
    assert "Pair[1, 2]" in message


def test_step_limit():
    rt = Runtime()
    program = prepare(rt, parse("(define (loop n) (loop n)) (loop 0)"))
    with pytest.raises(StepLimitExceeded) as exc_info:
        evaluate(rt, program, step_limit=1000)
    assert exc_info.value.limit == 1000


def test_steps_do_not_depend_on_mode(run_program):
    steps = {run_program(REVERSE_100, mode=mode)[2].steps for mode in ALL_MODES}
    assert len(steps) == 1


# --- [무작위 프로그램 차등 테스트] ---

SIGNATURE = (("Leaf", 0), ("One", 1), ("Pair", 2), ("Tri", 3))

WALK_AND_BUMP = """
(define (walk t)
  (match t
    ((Leaf) 0)
    ((One a) (+ (walk a) 1))
    ((Pair a b) (+ (walk a) (walk b)))
    ((Tri a b c) (+ (walk a) (+ (walk b) (walk c))))
    (n n)))
(define (bump t)
  (match t
    ((Leaf) (Leaf))
    ((One a) (One (bump a)))
    ((Pair a b) (Pair (bump b) (bump a)))
    ((Tri a b c) (Tri (bump a) (bump b) (bump c)))
    (n (+ n 1))))
"""


def _random_term(rng, depth, hole):
    """acc를 정확히 한 번(hole=True) 포함하는 생성자 식"""
    if depth == 0 or (not hole and rng.random() < 0.3):
        if hole:
            return "acc"
        return rng.choice(["n", str(rng.randrange(-9, 10)), "(Leaf)", "(+ n 1)"])
    name, arity = rng.choice(SIGNATURE[1:] if hole else SIGNATURE)
    slot = rng.randrange(arity) if hole else -1
    args = [_random_term(rng, depth - 1, j == slot) for j in range(arity)]
    return f"({' '.join([name, *args])})" if args else f"({name})"


def _random_program(rng):
    grow = f"(define (grow n acc) (if (= n 0) acc (grow (- n 1) {_random_term(rng, 3, True)})))"
    built = f"(grow {rng.randrange(1, 16)} (Leaf))"
    body = rng.choice([built, f"(walk {built})", f"(bump {built})", f"(walk (bump {built}))"])
    return WALK_AND_BUMP + grow + "\n" + body


def test_random_programs_agree_across_modes():
    rng = random.Random(1729)
    rules_seen = 0
    for _ in range(1000):
        program = parse(_random_program(rng))
        results = []
        for mode in ALL_MODES:
            rt = Runtime(Config(mode=mode, threshold=2))
            machine = Machine(rt, prepare(rt, program), TEST_STEP_LIMIT)
            results.append((machine.run(), machine.steps, rt))
        rules_seen += len(results[2][2].rules)

        baseline, steps, _ = results[0]
        for value, other_steps, _ in results[1:]:
            assert other_steps == steps
            assert show(value) == show(baseline)
            assert checksum(value) == checksum(baseline)
            assert structural_eq(value, baseline)
            assert type(value) is type(baseline)

    assert rules_seen > 0


def test_runtimes_share_no_shapes():
    first = Runtime()
    second = Runtime()
    a = evaluate(first, prepare(first, parse(REVERSE_100)))
    b = evaluate(second, prepare(second, parse(REVERSE_100)))
    assert type(a) is Boxed and type(b) is Boxed
    assert a.shape is not b.shape
    assert structural_eq(a, b)
