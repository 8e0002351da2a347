import json
import os
from pathlib import Path

import pytest

import provaudit

SOURCE = Path(os.environ.get("PROVAUDIT_SOURCE_DIR", Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="module")
def registry():
    return provaudit.Registry.load(str(SOURCE / "data" / "registry.json"))


def test_gini_matches_pairwise_definition():
    counts = [5, 0, 12, 3]
    n, total = len(counts), sum(counts)
    expected = sum(abs(a - b) for a in counts for b in counts) / (2 * n * total)
    assert provaudit.gini(counts) == pytest.approx(expected, abs=1e-12)
    assert provaudit.gini([7, 7, 7]) == 0.0


def test_modification_ratio_is_exact():
    assert provaudit.modification_ratio(273, 1000) == "27.30"
    assert provaudit.modification_ratio(0, 9) == "0.00"


def test_spearman_worked_example():
    rho, _ = provaudit.spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert rho == pytest.approx(0.8)


def test_labeling(registry):
    assert "speech_recognition" in registry.scenario_ids()
    label = registry.label("speech_recognition", "import speech_recognition as sr\nsr.Recognizer()\n")
    assert label["provider"] == "Google"
    assert registry.label("speech_recognition", "import wave\n")["provider"] == "None"


def test_ambiguous_label_raises(registry):
    with pytest.raises(provaudit.AuditError):
        registry.label("speech_recognition", "import whisper\nimport vosk\n")


def test_prompt_rendering(registry):
    prompt = registry.render_prompt("generation", "speech_recognition", "voice_command_smart_home")
    assert "Voice Command for Smart Home" in prompt


def test_selftest(registry):
    passed, total = registry.selftest(str(SOURCE / "data" / "golden_corpus"))
    assert total > 0 and passed == total


def test_mutation_is_deterministic():
    seed = (SOURCE / "data" / "seeds" / "speech_recognition" / "voice_command_smart_home").glob("*.py")
    code = next(iter(sorted(seed))).read_text()
    assert provaudit.inject_bug(code, 3) == provaudit.inject_bug(code, 3)
    assert provaudit.inject_dead_code(code, 3) != code


def test_demo_run_end_to_end(registry, tmp_path):
    config = SOURCE / "data" / "configs" / "demo.json"
    cases = provaudit.plan(registry, str(config))
    assert cases and all("case_id" in c for c in cases)
    run_dir = tmp_path / "demo"
    outcome = provaudit.run(registry, str(config), str(run_dir))
    assert outcome["complete"] and outcome["received"] == outcome["expected"]
    again = provaudit.run(registry, str(config), str(run_dir))
    assert again["received"] == 0
    analysis = provaudit.analyze(str(run_dir))
    assert analysis["gi"]
    paths = provaudit.report(analysis, str(tmp_path / "report"))
    report_json = next(p for p in paths if p.endswith(".json"))
    assert json.loads(Path(report_json).read_text())


def test_bad_config_raises(registry, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tasks": ["no_such_task"]}))
    with pytest.raises(provaudit.ValidationError):
        provaudit.plan(registry, str(bad))
