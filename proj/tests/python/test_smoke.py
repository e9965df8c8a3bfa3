import math
import os
from itertools import combinations
from pathlib import Path

import pytest

import nbharness as nbh

FIXTURES = Path(os.environ.get("NBH_FIXTURES_DIR", Path(__file__).resolve().parents[1] / "fixtures"))
CORPUS = FIXTURES / "corpus"


def brute_pass_at_k(n, c, k):
    subsets = list(combinations(range(n), k))
    return sum(any(i < c for i in s) for s in subsets) / len(subsets)


def test_pass_at_k_matches_enumeration():
    for n in range(1, 7):
        for c in range(n + 1):
            for k in range(1, n + 1):
                assert nbh.pass_at_k(n, c, k) == pytest.approx(brute_pass_at_k(n, c, k), abs=1e-12)


def test_bad_arguments_raise():
    with pytest.raises(nbh.NbharnessError):
        nbh.pass_at_k(3, 4, 1)
    with pytest.raises(nbh.NbharnessError):
        nbh.parse_notebook("{nope")


def test_notebook_round_trip():
    nb = nbh.load_notebook(str(CORPUS / "uni-a/ds-course/hw1_zipcodes.ipynb"))
    assert nbh.cell_counts(nb) == {"code": 5, "markdown": 3, "raw": 0}
    again = nbh.parse_notebook(nbh.serialize_notebook(nb))
    assert nbh.dedup_key(again) == nbh.dedup_key(nb)
    assert nb.cells[3].is_solution
    assert nb.cells[4].is_grade


def test_lexical_helpers():
    assert nbh.extract_defined_names("import numpy as np\nfrom math import sqrt as s") == {"np", "s"}
    assert nbh.find_assert_references("assert 'foo' in s", {"foo"}) == set()
    assert [line for line, _ in nbh.find_assertion_lines("x = 1\nassert x")] == [2]
    assert nbh.detect_data_dependencies("pd.read_csv('data/zips.csv')") == {"data/zips.csv"}
    assert nbh.strip_trailing_asserts("y = 1\nassert y") == "y = 1"


def test_curate_and_infill():
    nb = nbh.load_notebook(str(CORPUS / "uni-b/algo101/sorting.ipynb"))
    problems = nbh.curate_problems(nb)
    assert [p["solution_cell_index"] for p in problems] == [1, 3, 5, 7]
    examples = nbh.emit_infill_examples(nb, c=3, lookahead=True)
    assert len(examples) == len(nb.cells)
    assert all(e["source"].count("<fill:") == 1 for e in examples)
    assert nbh.serialize_context(nb, 0, c=1) == "<fill:markdown>"


def test_scores():
    assert nbh.bleu_proxy("a b c d", "a b c d") == 1.0
    assert nbh.bleu_proxy("a b c d", "a b c e") == pytest.approx((3 / 16) ** 0.25, abs=1e-12)
    assert nbh.spearman([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert math.isnan(nbh.spearman([1, 1], [1, 2]))
    assert nbh.rank_by_logprob([-2.0, -0.5, -0.5]) == 1
