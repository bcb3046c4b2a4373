"""Plot classical vs LBE-aware indices from an `lbeval reproduce` output directory.

    lbeval reproduce sine-map --out out/sine
    python docs/plot_figures.py out/sine

Writes step1_2.png and step3.png next to the CSV files. Needs matplotlib.
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_series(path):
    columns = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            for key, cell in row.items():
                columns.setdefault(key, []).append(float(cell) if cell else float("nan"))
    return columns


def plot_step(directory, step):
    rmse = read_series(directory / f"{step}_rmse.csv")
    mape = read_series(directory / f"{step}_mape.csv")
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    top.plot(rmse["n"], rmse["rmse"], label="RMSE")
    top.plot(rmse["n"], rmse["lrmse"], "--", label="LRMSE")
    top.legend()
    bottom.plot(mape["n"], mape["mape"], label="MAPE")
    bottom.plot(mape["n"], mape["lmape"], "--", label="LMAPE")
    bottom.set_xlabel("n")
    bottom.legend()
    fig.tight_layout()
    fig.savefig(directory / f"{step}.png", dpi=150)
    plt.close(fig)


def main():
    if len(sys.argv) != 2:
        sys.exit("usage: plot_figures.py OUTPUT_DIR")
    directory = Path(sys.argv[1])
    for step in ("step1_2", "step3"):
        plot_step(directory, step)


if __name__ == "__main__":
    main()
