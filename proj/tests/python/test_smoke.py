"""Smoke tests for the nlverify python module."""

import os
import textwrap

import pytest

import nlverify


@pytest.fixture()
def c_file(tmp_path):
    def write(name, source):
        p = tmp_path / name
        p.write_text(textwrap.dedent(source))
        return str(p)

    return write


def test_svcomp_score_formula():
    assert nlverify.svcomp_score(tp=1, fp=1, tn=1, fn=1, unk=1) == -45
    assert nlverify.svcomp_score(tp=921, fp=98, tn=830, fn=0, unk=0) == 1013


def test_metrics_with_unk_pos():
    m = nlverify.metrics(tp=1, fp=0, tn=2, fn=0, unk=1, unk_pos=1)
    assert m["accuracy"] == pytest.approx(0.75)
    assert m["precision"] == pytest.approx(1.0)
    assert m["recall"] == pytest.approx(0.5)
    none_m = nlverify.metrics(tp=0, fp=0, tn=5, fn=0, unk=0)
    assert none_m["precision"] is None
    assert none_m["recall"] is None


def test_extract_and_call_graph(c_file):
    path = c_file(
        "prog.c",
        """
        int leaf(int x) { return x + 1; }
        int helper(int x) { return leaf(x); }
        int main(void) { return helper(1); }
        """,
    )
    program = nlverify.extract([path])
    names = [f["name"] for f in program["functions"]]
    assert names == ["leaf", "helper", "main"]

    cg = nlverify.call_graph([path])
    members = [scc["members"] for scc in cg["order"]]
    assert members == [["leaf"], ["helper"], ["main"]]


def test_run_property_double_free(c_file, tmp_path):
    buggy = c_file(
        "df.c",
        """
        #include <stdlib.h>
        void release(char *p) {
            free(p);
        }
        int main(void) {
            char *buf = malloc(10);
            release(buf);
            free(buf);
            return 0;
        }
        """,
    )
    report = nlverify.run_property(
        [buggy], "valid-memsafety", store_path=str(tmp_path / "s.jsonl")
    )
    assert report["verdict"] == "FALSE"
    kinds = {issue["issue_kind"] for issue in report["issues"]}
    assert "double_free" in kinds

    # warm store: no further provider calls
    again = nlverify.run_property(
        [buggy], "valid-memsafety", store_path=str(tmp_path / "s.jsonl")
    )
    assert again["provider_calls"] == 0
    assert again["verdict"] == "FALSE"


def test_split_blocks_reassembles():
    stmt = "  x = x + 1; /* padding padding padding padding */\n"
    source = "void wide(void){\n" + stmt * 60 + "}\n"
    blocks = nlverify.split_blocks(source, "wide", 600)
    assert len(blocks) > 1
    assert "".join(b["source"] for b in blocks) == source


def test_validate_summary_rejects_bad_enums():
    with pytest.raises(Exception):
        nlverify.validate_summary(
            "alloc",
            {
                "function": "f",
                "description": "d",
                "allocations": [
                    {
                        "type": "stack",
                        "source": "alloca",
                        "returned": False,
                        "may_be_null": False,
                    }
                ],
            },
        )


def test_extract_json_and_rule_provider():
    assert nlverify.extract_json('```json\n{"a": 1}\n```') == {"a": 1}
    prompt = (
        "You are analyzing C/C++ code to generate memory allocation summaries.\n"
        "## Function to Analyze\n```c\nvoid f(int n) { p = malloc(n); }\n```\n\n"
        "Function: f\nSignature: void f(int n)\nFile: a.c\n"
    )
    out = nlverify.extract_json(nlverify.rule_complete(prompt))
    assert out["allocations"][0]["source"] == "malloc"
    assert out["allocations"][0]["size_expr"] == "n"


def test_external_prompt_contains_name():
    text = nlverify.render_external_prompt("memcpy")
    assert "Function name: memcpy" in text
