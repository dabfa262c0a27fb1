"""The command-line tool end to end, driven from Python.

Each call goes through the same entry point as the ``boundedmem`` script.
"""

from __future__ import annotations

import subprocess
import sys
import tempfile
from pathlib import Path


def run(*argv: str, stdin: str | None = None) -> str:
    done = subprocess.run(
        [sys.executable, "-m", "boundedmem.cli", *argv], input=stdin, capture_output=True, text=True
    )
    print(f"$ boundedmem {' '.join(argv)}  -> exit {done.returncode}")
    return done.stdout


with tempfile.TemporaryDirectory() as tmp:
    d = Path(tmp)
    # A random zero-sum game and a random profile, both reproducible from the seed.
    run("random-game", "--seed", "4", "--zero-sum", "--states", "1", "-o", str(d / "g.json"),
        "--profile-output", str(d / "p.json"))
    print(run("value", "-g", str(d / "g.json"), "-p", str(d / "p.json"), "--player", "1"))

    # induce writes a chain that solve-mc reads unchanged.
    chain = run("induce", "-g", str(d / "g.json"), "-p", str(d / "p.json"), "--prune")
    print(run("solve-mc", stdin=chain))

    print(run("check-ne", "-g", str(d / "g.json"), "-p", str(d / "p.json"), "--epsilon", "1/10",
              "--grid", "2")[:300], "...")

    (d / "phi.cnf").write_text("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n")
    print(run("maxsat", "--dimacs", str(d / "phi.cnf")))
    print(run("emit-for", "-g", str(d / "g.json"), "--kind", "ne", "--epsilon", "1/4", "--stats"))
