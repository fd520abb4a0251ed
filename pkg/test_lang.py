import random

import pytest

from vshape.exceptions import ParseError, ValidationError
from vshape.models import BenchmarkName
from vshape.services.bench import benchmark_text
from vshape.services.lang import (
    MAX_NESTING,
    App,
    Clause,
    Ctor,
    Definition,
    If,
    IntLit,
    Lambda,
    Match,
    PCtor,
    PInt,
    PrimOp,
    Program,
    PVar,
    PWild,
    Var,
    parse,
    parse_file,
    to_source,
    validate,
)
from vshape.services.shapes import ShapeRegistry


def test_parse_integer():
    assert parse("42") == Program((), IntLit(42))
    assert parse("\n\n   42 ; 주석") == parse("42")


def test_parse_constructor_arity_from_arguments():
    program = parse("(Cons 1 (Nil))")
    assert program.body == Ctor("Cons", (IntLit(1), Ctor("Nil", ())))


def test_parse_match():
    program = parse("(match x ((Cons h t) h) (_ 0))")
    assert program.body == Match(
        Var("x"),
        (
            Clause(PCtor("Cons", (PVar("h"), PVar("t"))), Var("h")),
            Clause(PWild(), IntLit(0)),
        ),
    )


def test_parse_forms():
    program = parse(
        """
        ; 주석은 줄 끝까지
        (define (add a b) (+ a b))
        (define seven 7)
        (if (< seven 10) (add seven -3) ((lambda (x) x) 0))
        """
    )
    assert program.definitions == (
        Definition("add", Lambda(("a", "b"), PrimOp("+", Var("a"), Var("b")))),
        Definition("seven", IntLit(7)),
    )
    assert program.body == If(
        PrimOp("<", Var("seven"), IntLit(10)),
        App(Var("add"), (Var("seven"), IntLit(-3))),
        App(Lambda(("x",), Var("x")), (IntLit(0),)),
    )


def test_parse_integer_patterns_and_zero_arg_call():
    program = parse("(match (f) (0 1) (-2 (g)) (n n))")
    assert program.body.scrutinee == App(Var("f"), ())
    assert [c.pattern for c in program.body.clauses] == [PInt(0), PInt(-2), PVar("n")]


def test_minus_alone_is_an_operator():
    assert parse("(- 5 3)").body == PrimOp("-", IntLit(5), IntLit(3))


@pytest.mark.parametrize(
    "text",
    [
        "(Cons 1",
        "(Cons 1))",
        ")",
        "",
        "; 주석만",
        "(match x)",
        "(match x ((Pair a a) a))",
        "(define a 1) (define a 2) a",
        "(define a 1)",
        "Nil",
        "(match x (Nil 0))",
        "12abc",
        "(+ 1)",
        "(+ 1 2 3)",
        "(lambda (x x) x)",
        "(lambda x x)",
        "()",
        "(if 1 2)",
        "1 2",
        "(f (define x 1))",
        "(lambda (if) 1)",
        "(match x ((f a) 1))",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError) as exc_info:
        parse(text)
    assert exc_info.value.exit_code == 2


def test_parse_error_location():
    with pytest.raises(ParseError) as exc_info:
        parse("(define a 1)\n(define a 2)\na")
    assert (exc_info.value.line, exc_info.value.col) == (2, 1)
    assert str(exc_info.value).startswith("2:1: ")


def _nested_sum(depth):
    return "(+ 1 " * depth + "0" + ")" * depth


def test_parse_deeply_nested_program():
    depth = 1000
    text = "(Cons 1 " * depth + "(Nil)" + ")" * depth
    program = validate(parse(text))
    assert to_source(program) == text + "\n"
    assert to_source(parse(_nested_sum(MAX_NESTING))).count("(") == MAX_NESTING


def test_nesting_beyond_limit_is_a_parse_error():
    with pytest.raises(ParseError) as exc_info:
        parse(_nested_sum(MAX_NESTING + 1))
    assert exc_info.value.exit_code == 2
    assert exc_info.value.line == 1


def test_parse_file(tmp_path):
    path = tmp_path / "answer.vs"
    path.write_text("42\n", encoding="utf-8")
    assert parse_file(path) == parse("42")
    with pytest.raises(ParseError):
        parse_file(tmp_path / "missing.vs")


def test_validate_rejects_unbound_variable():
    with pytest.raises(ValidationError) as exc_info:
        validate(parse("(lambda (x) y)"))
    assert exc_info.value.name == "y"
    assert exc_info.value.exit_code == 2


def test_validate_scoping():
    validate(parse("(lambda (x) (lambda (x) x))"))
    # 최상위 정의는 서로 보임
    validate(parse("(define (even n) (if (= n 0) 1 (odd (- n 1)))) (define (odd n) (even n)) (even 3)"))
    validate(parse("(match (Pair 1 2) ((Pair a b) (+ a b)))"))
    with pytest.raises(ValidationError):
        validate(parse("(match (Pair 1 2) ((Pair a _) b))"))


def test_validate_interns_constructors():
    registry = ShapeRegistry()
    program = validate(parse("(match (Cons 1 (Nil)) ((Cons h t) (Cons h t)))"), registry)

    scrutinee = program.body.scrutinee
    rebuilt = program.body.clauses[0].body
    assert scrutinee.cls is rebuilt.cls
    assert scrutinee.cls is registry.lookup_class("Cons", 2)
    assert program.body.clauses[0].pattern.cls is scrutinee.cls
    assert scrutinee.args[1].cls is registry.lookup_class("Nil", 0)


def _random_expr(rng, depth, names):
    choice = rng.randrange(8 if depth > 0 else 2)
    if choice == 0:
        return IntLit(rng.randrange(-50, 50))
    if choice == 1:
        return Var(rng.choice(names))
    if choice == 2:
        param = f"p{depth}"
        return Lambda((param,), _random_expr(rng, depth - 1, names + [param]))
    if choice == 3:
        return App(_random_expr(rng, depth - 1, names), (_random_expr(rng, depth - 1, names),))
    if choice == 4:
        arity = rng.randrange(3)
        return Ctor(f"K{arity}", tuple(_random_expr(rng, depth - 1, names) for _ in range(arity)))
    if choice == 5:
        return If(*(_random_expr(rng, depth - 1, names) for _ in range(3)))
    if choice == 6:
        op = rng.choice(["+", "-", "*", "=", "<"])
        return PrimOp(op, _random_expr(rng, depth - 1, names), _random_expr(rng, depth - 1, names))
    pattern = rng.choice([PWild(), PInt(3), PVar("m"), PCtor("K2", (PVar("m"), PWild()))])
    bound = names + ["m"] if pattern in (PVar("m"), PCtor("K2", (PVar("m"), PWild()))) else names
    return Match(_random_expr(rng, depth - 1, names), (Clause(pattern, _random_expr(rng, depth - 1, bound)),))


def test_print_then_parse_round_trip():
    for name in BenchmarkName:
        program = parse(benchmark_text(name, 10))
        assert parse(to_source(program)) == program

    rng = random.Random(11)
    for _ in range(300):
        program = Program((Definition("g", IntLit(1)),), _random_expr(rng, 4, ["g"]))
        assert parse(to_source(program)) == program
