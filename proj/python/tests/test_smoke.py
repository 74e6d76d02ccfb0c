import math
import os
from pathlib import Path

import pytest

import sqg

FIXTURES = Path(os.environ.get("SQG_FIXTURE_DIR", Path(__file__).resolve().parents[2] / "data" / "fixtures"))


def test_render_prompt_matches_table_example():
    text = sqg.render_prompt(sqg.Mode.context_aware, "证明开具时间要多久？", k=20)
    assert text == "帮我生成20条与证明开具时间要多久？相似的问句。"
    assert sqg.render_prompt(sqg.Mode.one_to_one, "任意") == "将输入的句子改写为保持相同意义但表述不同的新句子。"


def test_missing_answer_raises_value_error():
    with pytest.raises(ValueError):
        sqg.render_prompt(sqg.Mode.intention_enhanced, "q", None, 10)


def test_metric_anchors():
    assert sqg.distinct_n(["abc", "abd"], 1) == pytest.approx(4 / 6)
    assert sqg.distinct_avg(["abc", "abd"]) == pytest.approx(0.70833, abs=1e-5)
    h = math.sqrt(0.5)
    p, r, f = sqg.bertscore([[1, 0], [0, 1]], [[1, 0], [h, h]])
    assert f == pytest.approx(0.85355, abs=1e-5)
    s = [[0.9, 0.5]]
    assert sqg.semantic_precision(s) == pytest.approx(0.9)
    assert sqg.semantic_recall(s) == pytest.approx(0.7)
    assert sqg.semantic_f1(0.9, 0.7) == pytest.approx(0.7875)


def test_acceptance_display():
    ratio = sqg.acceptance_ratio(["accept"] * 84 + ["reject"] * 16)
    assert sqg.format_percent(ratio) == "84.0%"
    assert sqg.format_percent(11, 60) == "18.3%"


def test_parse_and_dedup():
    assert sqg.parse_multi_question("1. A\n2. B\n3. C", 3) == ["A", "B", "C"]
    assert sqg.dedup(["A", "a ", "B"]) == ["A", "B"]
    assert sqg.normalize("ＡＢ？") == "ab?"


def test_kb_generation_and_training(tmp_path):
    kb = sqg.ingest_qa_pairs(FIXTURES / "sample_qa.jsonl")
    assert len(kb) == 3
    pair = kb["cert-time"]
    assert pair.questions[0] == "证明开具时间要多久？"

    mock = sqg.MockProvider.from_file(FIXTURES / "mock_script.jsonl")
    batch = sqg.generate(mock, pair, 5, sqg.Mode.intention_enhanced, k=5, seed=0)
    assert len(batch.questions) == 5
    assert not batch.underfilled

    samples = sqg.build_training_samples(kb, sqg.Mode.context_aware, 2, 2, 1)
    assert len(samples) == 6
    out = tmp_path / "train.jsonl"
    sqg.export_finetune_jsonl(samples, out)
    assert len(out.read_text(encoding="utf-8").splitlines()) == 6

    kb.save(tmp_path / "kb.jsonl")
    assert len(sqg.load_kb(tmp_path / "kb.jsonl")) == 3


def test_evaluate_identity_corpus():
    qs = ["证明开具时间要多久？", "存款证明多久能开好？"]
    (report,) = sqg.evaluate([(qs, qs)], sqg.HashEmbedder(), [2])
    assert report.precision == pytest.approx(1.0)
    assert report.f1 == pytest.approx(1.0)
