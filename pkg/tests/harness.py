"""Timing and one-line reporting for the acceptance criteria."""

import time
from contextlib import contextmanager

RESULTS = {}


@contextmanager
def criterion(number, title, budget):
    t0 = time.perf_counter()
    detail = {"text": ""}
    ok = False
    try:
        yield detail
        elapsed = time.perf_counter() - t0
        assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        status = "PASS" if ok else "FAIL"
        extra = f" {detail['text']}" if detail["text"] else ""
        line = f"[{status}] criterion {number:>2}: {title} ({elapsed:.2f}s / {budget}s){extra}"
        RESULTS[number] = (ok, elapsed, budget, line)
        print(line)
