"""End-to-end run through the command-line pipeline.

Writes a small YAML config, runs the four stages through the CLI in one
shot, then shows what landed on disk: encoded and decoded RF captures,
one reconstructed volume and one B-scan per scheme, and the metric CSVs.
The same run split into `simulate`/`decode`/`beamform`/`metrics`
invocations produces byte-identical artifacts.
"""

import pathlib
import subprocess
import sys

OUT = pathlib.Path(__file__).parent / "out" / "pipeline"

CONFIG = """\
geometry:
  n_rows: 8
  n_cols: 8
  pitch: 337.67e-6
  center_frequency: 4.3e+6
  sampling_rate: 20.0e+6
  sound_speed: 1452.0
pulse:
  fractional_bandwidth: 0.7
acquisition:
  focal_depth: 5.0e-3
  plane_start: -1.0e-3
  plane_step: 0.5e-3
  plane_count: 5
  planes_per_image: 3
  uforces_k: 4
  prf: 4000.0
phantom:
  kind: wires
  wires:
    - ys: [0.0]
      depth: 5.0e-3
      x_extent: 1.5e-3
      spacing: 0.25e-3
grid:
  x: {start: -1.0e-3, step: 0.25e-3, count: 9}
  y: {start: -1.0e-3, step: 0.5e-3, count: 5}
  z: {start: 4.0e-3, step: 0.1e-3, count: 21}
metrics:
  fwhm:
    x: 0.0
  gcnr:
    x_halfspan: 1.0e-3
    bins: 16
    regions:
      - label: wire
        inside: {y: 0.0, z: 5.0e-3, radius: 0.3e-3}
        outside:
          - {y: 0.0, z: 4.3e-3, radius: 0.3e-3}
seed: 5
"""


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cfg = OUT / "run.yaml"
    cfg.write_text(CONFIG)

    cmd = [sys.executable, "-m", "rcbeam", "all",
           "--config", str(cfg), "--output-dir", str(OUT / "artifacts")]
    print("$", " ".join(cmd[2:]))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout, end="")
    if proc.returncode != 0:
        print(proc.stderr, end="")
        raise SystemExit(proc.returncode)

    print("\nartifacts:")
    for p in sorted((OUT / "artifacts").iterdir()):
        print(f"  {p.name:24s} {p.stat().st_size:>8d} bytes")

    for csv in ("summary.csv", "fwhm.csv", "gcnr.csv"):
        print(f"\n{csv}:")
        print((OUT / "artifacts" / csv).read_text(), end="")


if __name__ == "__main__":
    main()
