import subprocess
import sys
from pathlib import Path

SCRIPT = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_quick_benchmark_runs():
    proc = subprocess.run([sys.executable, str(SCRIPT), "--quick", "--repeat", "1"],
                          capture_output=True, text=True, check=False, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert "build_dense n=6" in proc.stdout
