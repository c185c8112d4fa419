from __future__ import annotations

import json

import pytest


class FakeClock:
    """Deterministic time source for assignment and store tests."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


def make_documents(n_docs: int, models: tuple[str, ...] = ("m1",), n_segments: int = 1,
                   text_len: int = 40) -> list:
    docs = []
    for d in range(n_docs):
        segments = []
        for s in range(n_segments):
            base = f"doc {d} segment {s}:"
            segments.append({
                "src": f"source {base} {'x' * text_len}",
                "tgt": {m: f"candidate {i} for {base} {'y' * text_len}"
                        for i, m in enumerate(models)},
            })
        docs.append(segments)
    return docs


def pooled_campaign(campaign_id: str = "camp", assignment: str = "single-stream",
                    protocol: str = "ESA", users: int = 3, n_docs: int = 5,
                    models: tuple[str, ...] = ("m1",), n_segments: int = 1,
                    **info_extra) -> dict:
    info = {"assignment": assignment, "protocol": protocol, "users": users, **info_extra}
    return {
        "campaign_id": campaign_id,
        "info": info,
        "data": make_documents(n_docs, models, n_segments),
    }


def dynamic_campaign(campaign_id: str = "camp", n_docs: int = 10,
                     models: tuple[str, ...] = ("A", "B", "C"), users: int = 3,
                     dynamic_top: int = 2, dynamic_first: int = 0,
                     dynamic_backoff: float = 0.0, n_segments: int = 1,
                     **info_extra) -> dict:
    return pooled_campaign(
        campaign_id, assignment="dynamic", users=users, n_docs=n_docs, models=models,
        n_segments=n_segments, dynamic_top=dynamic_top, dynamic_first=dynamic_first,
        dynamic_backoff=dynamic_backoff, **info_extra,
    )


def task_campaign(campaign_id: str = "camp", tasks: int = 2, docs_per_task: int = 3,
                  models: tuple[str, ...] = ("m1", "m2"), n_segments: int = 1,
                  protocol: str = "ESA", **info_extra) -> dict:
    data = []
    for t in range(tasks):
        task_docs = []
        for d in range(docs_per_task):
            segments = []
            for s in range(n_segments):
                base = f"task {t} doc {d} seg {s}"
                segments.append({
                    "src": f"source {base} and some padding text here",
                    "tgt": {m: f"candidate {i} {base} with padding text too"
                            for i, m in enumerate(models)},
                })
            task_docs.append(segments)
        data.append(task_docs)
    return {
        "campaign_id": campaign_id,
        "info": {"assignment": "task-based", "protocol": protocol, **info_extra},
        "data": data,
    }


def as_bytes(campaign: dict) -> bytes:
    return json.dumps(campaign, ensure_ascii=False).encode("utf-8")
