"""Run the acceptance suite and print one line per criterion."""

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent.parent / "tests"

if __name__ == "__main__":
    sys.path.insert(0, str(TESTS))
    code = pytest.main([str(TESTS / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"])
    import test_acceptance

    print()
    for line in sorted(test_acceptance.LINES, key=lambda s: int(s.split()[1])):
        print(line)
    sys.exit(int(code))
