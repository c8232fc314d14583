import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rosa import corpus
from rosa import rtypes as T
from rosa.frontend import load_program

EUCLIDEAN_TYPES = {
    "p0": "integer", "n1": "integer", "n2": "integer", "X": "matrix(double)", "Y": "matrix(double)",
    "b": "vector(double)", "nx": "integer", "ny": "integer", "p": "integer", "ctr": "integer",
    "i": "integer", "j": "integer", "posX": "integer", "posY": "integer", "total": "double",
    "k": "integer", "ans": "vector(double)", "dist": "vector(double)",
}

ELEMS = [t for t in T.CHAIN if t not in ("NULL", "expr")]


def random_type(rng: random.Random, depth: int = 0) -> T.RType:
    r = rng.random()
    if r < 0.05:
        return T.UNKNOWN_T
    if r < 0.08:
        return T.TOP_T
    if r < 0.35:
        return T.basic(rng.choice(T.CHAIN))
    if r < 0.6:
        return T.vector(rng.choice(ELEMS))
    if r < 0.75:
        return T.matrix(rng.choice(ELEMS))
    if r < 0.85 or depth > 1:
        return T.array(rng.choice(ELEMS))
    if r < 0.93:
        names = rng.sample(["x", "y", "z"], rng.randint(1, 2))
        return T.record([(n, random_type(rng, depth + 1)) for n in sorted(names)])
    return T.function([random_type(rng, depth + 1)], random_type(rng, depth + 1))


def test_euclidean_table_reproduced():
    env = T.infer(corpus.load("euclidean"))
    assert env.table() == EUCLIDEAN_TYPES


def test_string_join_identities():
    assert T.join(T.INTEGER, T.STRING) == T.STRING
    assert T.join(T.vector("integer"), T.STRING) == T.vector("string")
    assert T.join(T.vector("integer"), T.vector("string")) == T.vector("string")


def test_lattice_laws_on_random_types():
    rng = random.Random(20240607)
    for _ in range(10000):
        a, b, c = (random_type(rng) for _ in range(3))
        assert T.join(a, b) == T.join(b, a)
        assert T.join(T.join(a, b), c) == T.join(a, T.join(b, c))
        assert T.join(a, a) == a
        assert T.join(a, T.UNKNOWN_T) == a
        assert T.join(a, T.TOP_T) == T.TOP_T


type_strategy = st.integers(0, 2**32).map(lambda s: random_type(random.Random(s)))


@settings(max_examples=300, deadline=None)
@given(type_strategy, type_strategy)
def test_join_is_an_upper_bound(a, b):
    j = T.join(a, b)
    assert T.leq(a, j) and T.leq(b, j)


def test_parse_type_inverts_str():
    for t in ["integer", "vector(double)", "matrix(integer)", "Unknown", "Top"]:
        assert str(T.parse_type(t)) == t


def test_floor_override_gives_integer_mid():
    env = T.infer(corpus.load("binsearch"))
    assert str(env.type_of("binsearch", "mid")) == "integer"


def test_c_joins_all_elements():
    env = T.infer(load_program('x <- c(1L, FALSE, 2.3, "a", 2+3i)'))
    assert str(env.type_of("<top>", "x")) == "vector(string)"


def test_conflicting_constructors_join_to_top():
    env = T.infer(load_program("x <- 1\nif (x > 0) x <- list(a = 1)"))
    assert env.type_of("<top>", "x").is_top


def test_empty_program_has_empty_table():
    env = T.infer(load_program(""))
    assert env.table() == {}
    assert T.dump_types(env) == ""


def test_json_dump_round_trips():
    env = T.infer(corpus.load("euclidean"))
    data = T.types_from_json(T.dump_types(env, "json"))
    assert data["dist"]["total"] == "double"
    assert json.loads(T.dump_types(env, "json", merged=True)) == EUCLIDEAN_TYPES


@pytest.mark.parametrize("name", corpus.names())
def test_inference_terminates_on_corpus(name):
    env = T.infer(corpus.load(name))
    assert env.iterations < 100
