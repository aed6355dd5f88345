"""Artifact writers: delimited estimates, JSON reports, and rendered figures.

Every artifact embeds the run's provenance (config hash, seed, tool version).
JSON files are written atomically with sorted keys and no timestamps so that
identical configurations reproduce byte-identical output.  Figures are
rendered with the Agg backend next to the delimited files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import __version__

ESTIMATE_COLUMNS = ["id", "value", "stderr", "n", "seed"]
PROVENANCE_COLUMNS = ["dt", "config_hash", "version"]


def config_hash(mapping: dict) -> str:
    """Order-independent hash of a flat (section.key -> value) mapping."""
    lines = sorted(f"{k}={mapping[k]}" for k in mapping)
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_json_atomic(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=True,
                      default=_json_default) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def write_estimates_csv(path, rows, provenance: dict | None = None,
                        append: bool = False) -> Path:
    """One row per cell/estimate: (id, value, stderr, n, seed) + provenance."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    prov = provenance or {}
    columns = ESTIMATE_COLUMNS + [c for c in PROVENANCE_COLUMNS if c in prov]
    fresh = not (append and path.exists())
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        if fresh:
            writer.writeheader()
        for row in rows:
            full = dict(row)
            for c in columns:
                full.setdefault(c, prov.get(c, ""))
            writer.writerow({c: full[c] for c in columns})
    return path


def write_eigen_csv(path, eig, k: int | None = None) -> Path:
    """Eigenfunction table: node, phi_1, ..., phi_k."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    k = k if k is not None else eig.eigenvectors.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"phi_{j+1}" for j in range(k)])
        for i, x in enumerate(eig.nodes):
            writer.writerow([f"{x:.12g}"] + [f"{eig.eigenvectors[i, j]:.12g}" for j in range(k)])
    return path


def provenance_payload(cfg_hash: str, seed) -> dict:
    return {"config_hash": cfg_hash, "seed": seed, "version": __version__}


# ---------------------------------------------------------------------------
# figures


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight", metadata={"Software": ""})
    plt.close(fig)
    return path


def fig_blowup(profile, path) -> Path:
    x = np.log(1.0 / profile.step_sizes)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(x, profile.quotients, yerr=3 * profile.quotient_stderrs, fmt="o",
                capsize=3, label="difference quotients")
    xs = np.linspace(x.min(), x.max(), 50)
    ax.plot(xs, profile.intercept + profile.slope * xs, "-",
            label=f"fit: b={profile.slope:.3f} (se {profile.slope_stderr:.3f})")
    ax.set_xlabel("log(1/h)")
    ax.set_ylabel("|u(z+h) - u(z-h)| / 2h")
    ax.set_title(f"gradient blow-up probe: {profile.potential_name}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_eigenfunctions(eig, path, k: int | None = None) -> Path:
    k = k if k is not None else min(3, eig.eigenvectors.shape[1])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for j in range(k):
        ax.plot(eig.nodes, eig.eigenvectors[:, j],
                label=f"phi_{j+1}, lambda={eig.eigenvalues[j]:.5f}")
    ax.set_xlabel("x")
    ax.set_ylabel("eigenfunction (L2-normalized)")
    ax.set_title(f"Dirichlet eigenfunctions, alpha={eig.alpha}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_reflected_density(result, path) -> Path:
    centers = 0.5 * (result.edges[:-1] + result.edges[1:])
    pos = result.positive_cells
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(centers[pos], result.difference[pos],
                yerr=3 * result.difference_stderr[pos], fmt="o", capsize=3,
                label="coupled difference")
    ax.errorbar(centers[pos], result.direct.masses[pos],
                yerr=3 * result.direct.stderrs[pos], fmt="s", capsize=3,
                label="subordinated killed BM")
    ax.set_xlabel("cell center")
    ax.set_ylabel("cell mass")
    ax.set_title("half-domain density: two estimators")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_ratio_profile(report, path) -> Path:
    prof = report.details.get("profile", [])
    if not prof:
        return _save(plt.subplots(figsize=(5.0, 3.4))[0], path)
    deltas = [row["delta"] for row in prof]
    ratios = [row["R_fine"] for row in prof]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(deltas, ratios, "o-")
    ax.set_xlabel("distance to boundary")
    ax.set_ylabel("|grad u| (delta ^ 1) / u")
    ax.set_title(report.name)
    return _save(fig, path)


def fig_lambda_curve(report, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(report.s_values, report.lambda1_values, "o-", ms=3)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.axvline(report.s_star, color="r", ls="--", label=f"s* = {report.s_star:.4f}")
    ax.axvspan(report.bracket[0], report.bracket[1], alpha=0.15, color="r")
    ax.set_xlabel("coupling s")
    ax.set_ylabel("lambda_1(s q0)")
    ax.set_title("gaugeability bracket")
    ax.legend(fontsize=8)
    return _save(fig, path)


def fig_exponent_fit(report, path) -> Path:
    det = report.details
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if "values" in det:
        vals = np.asarray(det["values"], dtype=float)
        ks = np.arange(len(vals))
        ax.semilogy(ks, vals, "o-")
        ax.set_xlabel("dyadic index")
        ax.set_ylabel("reflected Green gain")
        ax.set_title(
            f"{report.name}: fit {det.get('fitted_exponent', float('nan')):.3f}"
            f" vs target {det.get('target_exponent', float('nan')):.3f}"
        )
    return _save(fig, path)


def render_report_table(reports) -> str:
    """Human-readable fixed-width table of harness outcomes."""
    lines = [f"{'harness':34s} {'pass':5s} {'worst':>12s} {'tol':>9s}  grid"]
    for rep in reports:
        lines.append(
            f"{rep.name:34s} {'ok' if rep.passed else 'FAIL':5s} "
            f"{rep.worst_ratio:12.5g} {rep.tolerance:9.3g}  {rep.grid}"
        )
    return "\n".join(lines) + "\n"
