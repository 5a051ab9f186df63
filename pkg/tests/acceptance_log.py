"""Pass/fail registry for the acceptance criteria, printed at the end of the run."""
from contextlib import contextmanager

RESULTS: dict[int, tuple[bool, str]] = {}


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        RESULTS[number] = (False, title)
        print(f"C{number:<2} FAIL  {title}")
        raise
    RESULTS[number] = (True, title)
    print(f"C{number:<2} PASS  {title}")


def lines() -> list[str]:
    return [f"C{n:<2} {'PASS' if ok else 'FAIL'}  {title}" for n, (ok, title) in sorted(RESULTS.items())]
