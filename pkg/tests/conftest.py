import pytest

from pplcheck.data import ClaimRecord, Dataset, VeracityLabel

S = VeracityLabel.SUPPORTED
U = VeracityLabel.UNSUPPORTED


def record(i, claim, evidence="", label=S):
    return ClaimRecord(id=f"r{i:03d}", claim=claim, evidence=evidence, label=label)


def dataset(records, name="test"):
    return Dataset(name=name, records=tuple(records))


@pytest.fixture
def tiny_dataset():
    return dataset(
        [
            record(0, "the sky is blue", "the sky is blue today", S),
            record(1, "grass is red", "grass is green", U),
            record(2, "water is wet", "water is wet and clear", S),
            record(3, "rocks are soft", "rocks are hard", U),
        ]
    )


# --- acceptance summary -----------------------------------------------------

_CRITERIA = (
    ("test_p1", "P1 perplexity correctness"),
    ("test_p2", "P2 threshold search matches brute-force oracle"),
    ("test_p3", "P3 metric correctness"),
    ("test_p4", "P4 end-to-end few-shot separation"),
    ("test_p5", "P5 evidence-ablation locality"),
    ("test_p6", "P6 ranking and random baseline"),
    ("test_p7", "P7 negation rules"),
    ("test_p8", "P8 byte-identical reruns"),
)


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, ()):
            name = getattr(rep, "nodeid", "")
            if "test_acceptance" not in name:
                continue
            for prefix, title in _CRITERIA:
                if f"::{prefix}" in name:
                    outcomes.setdefault(title, status.upper())
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for _, title in _CRITERIA:
        status = outcomes.get(title)
        if status is not None:
            verdict = "PASS" if status == "PASSED" else status
            terminalreporter.write_line(f"{title}: {verdict}")
