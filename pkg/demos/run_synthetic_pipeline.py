"""Walk the whole pipeline over a generated world, stage by stage.

Every stage is the same function the ``fssbench`` console script calls,
so the sequence below is exactly what you would type in a shell:

    fssbench synth --config world.cfg --out demo_out --seed 7
    fssbench ingest --out demo_out
    fssbench disambiguate --out demo_out
    fssbench derive-staff --out demo_out --min-clusters 1 --min-age 1 --recency 2015
    fssbench score --out demo_out
    fssbench compare --out demo_out
    fssbench report --out demo_out
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from fssbench.cli import run_pipeline


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", help="artifact directory (default: a temp dir)")
    args = parser.parse_args()

    workdir = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="fssbench_demo_"))
    workdir.mkdir(parents=True, exist_ok=True)
    config = workdir / "world.cfg"
    config.write_text(
        "# a mid-sized world with some roster contamination\n"
        "n_universities = 5\n"
        "n_researchers = 80\n"
        "n_scs = 4\n"
        "non_faculty_share = 0.2\n"
        "orcid_missing_rate = 0.3\n"
        "initials_only_rate = 0.4\n")
    out = str(workdir / "out")

    stages = [
        ["synth", "--config", str(config), "--out", out, "--seed", str(args.seed)],
        ["ingest", "--out", out],
        ["disambiguate", "--out", out],
        ["derive-staff", "--out", out, "--min-clusters", "1",
         "--min-age", "1", "--recency", "2015"],
        ["score", "--out", out],
        ["compare", "--out", out],
        ["report", "--out", out],
    ]
    for argv in stages:
        print(f"\n$ fssbench {' '.join(argv)}")
        code = run_pipeline(argv)
        if code != 0:
            print(f"stage failed with exit code {code}", file=sys.stderr)
            return code

    manifest = json.loads((Path(out) / "run_manifest.json").read_text())
    print(f"\nartifacts in {out}:")
    for path in sorted(Path(out).iterdir()):
        print(f"  {path.name:28s} {path.stat().st_size:>8d} bytes")
    print(f"\nlast stage: {manifest['subcommand']}, config hash {manifest['config_hash'][:12]}...")
    return 0


if __name__ == "__main__":
    sys.exit(main())
