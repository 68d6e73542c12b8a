import json

import pytest

from mrleval.corpus import Dataset, GoldAnswer, Paragraph, QASample

_criteria: dict[int, list[str]] = {}


def make_sample(sid, context, answers=(), question="מה?", article="a0", paragraph="0", label=None):
    """Build a sample whose answers are located by their first occurrence in ``context``."""
    golds = tuple(GoldAnswer(a, context.index(a)) for a in answers)
    return QASample(
        id=sid,
        paragraph=Paragraph(article, paragraph, context),
        question=question,
        answers=golds,
        is_impossible=not golds,
        quality_label=label,
    )


def make_dataset(*samples):
    return Dataset(tuple(samples))


@pytest.fixture
def squad_file(tmp_path):
    def write(obj, name="d.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj, ensure_ascii=False), encoding="utf-8")
        return path

    return write


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark in dict(report.user_properties).get("criteria", ()):
        _criteria.setdefault(mark, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        marks = [m.args[0] for m in item.iter_markers("criterion")]
        if marks:
            item.user_properties.append(("criteria", marks))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        if "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        detail = ", ".join(f"{outcomes.count(o)} {o}" for o in ("passed", "failed", "skipped") if o in outcomes)
        terminalreporter.write_line(f"criterion {n}: {status} ({detail})")
