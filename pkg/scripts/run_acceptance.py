"""Run the acceptance checks A1-A9 and print one PASS/FAIL line each."""
import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
sys.exit(subprocess.call([sys.executable, str(root / "tests" / "test_acceptance.py")], cwd=root / "tests"))
