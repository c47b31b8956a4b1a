# SPDX-License-Identifier: Apache-2.0
import pytest

import liftex


def test_twoheads_auto_is_lifted(corpus):
    r = liftex.run("twoheads", corpus / "twoheads.px", populations={"coins": 3})
    assert r["mode"] == "lifted"
    assert r["probability"] == pytest.approx(0.5, abs=1e-12)
    assert r["subsumption"] == {"X": True, "Y": True}
    assert r["ground_nodes"] == "skipped"


def test_dice_falls_back_to_ground(corpus):
    r = liftex.run("q", corpus / "dice.px", populations={"dice": 2})
    assert r["mode"] == "ground"
    assert r["probability"] == pytest.approx(1 / 18, abs=1e-9)
    assert False in r["subsumption"].values()


def test_compare_and_recurrences(corpus):
    r = liftex.run("twoheads", corpus / "twoheads.px", mode="compare", populations={"coins": 4}, recurrences=True)
    assert r["p_lifted"] == pytest.approx(0.6875, abs=1e-12)
    assert r["p_ground"] == pytest.approx(0.6875, abs=1e-12)
    assert "fhat2 = 0.5" in r["recurrences"]


def test_program_text_and_errors():
    text = "p :- X in c, msw(s, X, a).\n:- population(c, 2).\n:- set_sw(s, categorical([a:0.5, b:0.5])).\n"
    assert liftex.run("p", text=text)["probability"] == pytest.approx(0.75)
    with pytest.raises(liftex.LiftexError) as e:
        liftex.run("p", text="p :- foo(.\n")
    assert e.value.code == 2
    with pytest.raises(liftex.LiftexError) as e:
        liftex.run("nope", text=text)
    assert e.value.code == 4
    with pytest.raises(ValueError):
        liftex.run("p")


def test_bench(corpus):
    t = liftex.bench("twoheads", "coins", [10, 100, 1000], corpus / "twoheads.px")
    assert t["lifted_nodes_constant"] is True
    assert [row["n"] for row in t["rows"]] == [10, 100, 1000]
