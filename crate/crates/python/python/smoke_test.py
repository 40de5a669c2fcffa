"""Smoke test for the pyhalq extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyhalq-*.whl
then run:
    python crates/python/python/smoke_test.py
"""

import math
import os
import tempfile

import pyhalq

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "..", "core", "fixtures")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def test_text():
    assert pyhalq.normalize_text("La tomate, un fruit?\n\nOui.") == "la tomate un fruit oui"
    assert pyhalq.tokenize(" a  b ") == ["a", "b"]


def test_index_and_queries():
    idx = pyhalq.Index.from_texts([("d", "a b c")], window=2)
    close(idx.score_and("d", "a", "b"), 14 / math.sqrt(238), 1e-12)
    close(idx.score_without("d", "a", "b"), 1 - 196 / 238, 1e-12)
    assert idx.score_without("d", "a", "b", refined=True, tau=0.0) <= idx.score_without("d", "a", "b")
    vec = dict(idx.context_vector("d", "a"))
    close(vec["a"], 3 / math.sqrt(14), 1e-12)

    corpus = pyhalq.Index.from_manifest(os.path.join(FIXTURES, "corpus", "manifest.json"))
    assert len(corpus) == 3
    assert corpus.fold("Tomates") == "tomate"
    ranking = corpus.query("ET", "tomate", "fruit")
    scores = [s for _, s in ranking]
    assert scores == sorted(scores, reverse=True)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "index.json")
        corpus.save(path)
        again = pyhalq.Index.load(path)
        assert again.query("SANS", "tomate", "légume") == corpus.query("SANS", "tomate", "légume")

    try:
        corpus.query("OU", "tomate", "fruit")
    except ValueError:
        pass
    else:
        raise AssertionError("bad operator accepted")


def test_bell():
    close(pyhalq.bell_poll(0.16, 0.525, 0.333).s_value, 0.39, 0.01)
    d2 = pyhalq.bell_hal(0.581, 0.469, 0.0, 0.0)
    close(d2.s_value, 2.23, 0.01)
    assert d2.regime == "quantum"
    assert pyhalq.bell_hal(0.788, 0.091, 0.0, 0.0).regime == "beyond_cirelson"
    close(pyhalq.bell_hal(0.581, 0.469, 0.0, 0.0, variant="printed").s_value, 0.224, 1e-12)
    assert pyhalq.classify_regime(2.0) == "classical"

    tomate = pyhalq.interference_analysis(0.8, 0.6, 1.0)
    close(tomate.interference_term, 0.3, 1e-12)
    assert tomate.extension_flag == "over"
    assert pyhalq.interference_analysis(0.0, 0.5, 0.5).cos_phi_unit_c is None

    close(pyhalq.mean_score([9, 9, 6, 4], 10), 0.7, 1e-12)
    _, zero, _ = pyhalq.exclusivity_stats([("a", 5.5, 4.5), ("b", 4.75, 6.25)], 10)
    assert zero == 1


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
    print("pyhalq smoke test passed")
