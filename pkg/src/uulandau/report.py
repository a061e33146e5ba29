"""Report emission: delimited output (CSV, JSON), a gnuplot companion script
for the convergence study, and rendered matplotlib figures alongside."""

import json
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_gnuplot_script(path, csv_name, title):
    lines = [
        "# gnuplot companion for the eps-sweep; run: gnuplot <this file>",
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'eps'",
        "set ylabel 'error'",
        f"set title '{title}'",
        "set key left top",
        "set terminal pngcairo size 800,600",
        f"set output '{os.path.splitext(csv_name)[0]}.gnuplot.png'",
        f"plot '{csv_name}' using 1:2 skip 1 with linespoints title 'error'",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def figure_convergence(report, path):
    """log-log error sweep with the fitted rate line."""
    eps = list(report.eps_list)
    err = list(report.errors)
    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    ax.loglog(eps, err, "o-", label="measured error")
    if report.theta_hat is not None:
        xs = [min(eps), max(eps)]
        ys = [math.exp(report.intercept) * x**report.theta_hat for x in xs]
        ax.loglog(xs, ys, "--",
                  label=f"fit slope {report.theta_hat:.3f} (r2={report.r_squared:.3f})")
    for e in report.excluded:
        ax.axvline(e, color="0.8", linestyle=":")
    ax.set_xlabel("eps")
    ax.set_ylabel("error")
    ax.set_title("semi-classical convergence")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def figure_weak_study(rows, path):
    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    for row in rows:
        if row.invariant:
            continue
        eps = sorted(row.distances, reverse=True)
        ax.loglog(eps, [row.distances[e] for e in eps], "o-",
                  label=f"{row.label} (slope {row.slope:.2f})" if row.slope else row.label)
    ax.set_xlabel("eps")
    ax.set_ylabel("|<Q_UU f, phi> - <Q_L f, phi>|")
    ax.set_title("operator-level limit")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def figure_diagnostics(records, path):
    ts = [r.t for r in records]
    fig, axes = plt.subplots(2, 2, figsize=(8, 6))
    m0 = records[0].mass
    axes[0, 0].plot(ts, [abs(r.mass - m0) / abs(m0) if m0 else r.mass for r in records])
    axes[0, 0].set_title("relative mass drift")
    axes[0, 1].plot(ts, [r.linf for r in records])
    axes[0, 1].set_title("sup norm")
    axes[1, 0].plot(ts, [r.energy for r in records])
    axes[1, 0].set_title("energy")
    axes[1, 1].plot(ts, [r.rhs_norm for r in records])
    axes[1, 1].set_title("rhs L2 norm")
    for ax in axes.flat:
        ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def figure_checks(rows, path, value_col=1, ref_col=2):
    """Bar chart of |relative error| per named check."""
    names = [r[0] for r in rows]
    rel = []
    for r in rows:
        v, ref = float(r[value_col]), float(r[ref_col])
        rel.append(abs(v - ref) / max(abs(ref), 1e-300))
    fig, ax = plt.subplots(figsize=(7, 0.35 * len(names) + 1.5))
    ax.barh(range(len(names)), [max(x, 1e-18) for x in rel])
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel("|relative deviation|")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
