"""Markdown + figure rendering of whatever evaluation artifacts exist."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from ..errors import DependencyError
from .runrecord import RunRecord

GEN_REPORT = "stage3_genmetrics/gen_report.json"
CLF_REPORT = "stage6_clf/clf_reports.json"
SEG_REPORT = "stage5_seg/seg_eval.json"
CAM_GRID = "stage4_cam/cam_grid.png"


def _fmt(value: float, places: int = 4) -> str:
    return f"{value:.{places}f}"


def generation_table(rows: list[dict]) -> list[str]:
    lines = [
        "| Model | Disease class | FID | IS (mean) | IS (std) | n real | n gen | Extractor |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for r in rows:
        lines.append(
            f"| {r['model']} | {r['disease_class']} | {_fmt(r['fid'])} | "
            f"{_fmt(r['is_mean'])} | {_fmt(r['is_std'])} | {r['n_real']} | "
            f"{r['n_gen']} | {r['extractor_name']} |")
    return lines


def classification_table(rows: list[dict]) -> list[str]:
    lines = [
        "| Model | Accuracy | Precision | Recall | F1 | Log loss |",
        "|---|---|---|---|---|---|",
    ]
    for r in rows:
        if r.get("status") != "ok":
            lines.append(f"| {r['model']} | failed: {r.get('error', '?')} | | | | |")
            continue
        lines.append(
            f"| {r['model']} | {_fmt(r['accuracy'])} | {_fmt(r['precision'])} | "
            f"{_fmt(r['recall'])} | {_fmt(r['f1'])} | {_fmt(r['log_loss'])} |")
    return lines


def segmentation_table(doc: dict) -> list[str]:
    lines = [
        "| Source | Task | AP | AP@0.5 | AP@0.75 | Dice |",
        "|---|---|---|---|---|---|",
    ]
    mask = doc["mask"]
    bbox = doc["bbox"]
    lines.append(
        f"| {doc['source']} | segmentation | {_fmt(100 * mask['ap'], 3)} | "
        f"{_fmt(100 * mask['ap50'], 3)} | {_fmt(100 * mask['ap75'], 3)} | "
        f"{_fmt(doc['dice'])} |")
    lines.append(
        f"| {doc['source']} | bounding box | {_fmt(100 * bbox['ap'], 3)} | "
        f"{_fmt(100 * bbox['ap50'], 3)} | {_fmt(100 * bbox['ap75'], 3)} | |")
    return lines


def _loss_curves(run_dir: Path, fig_dir: Path) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    for csv_path in sorted((run_dir / "stage2_gan").glob("history_*.csv")):
        per_epoch: dict[int, list[float]] = defaultdict(list)
        adv: dict[int, list[float]] = defaultdict(list)
        with open(csv_path) as fh:
            for row in csv.DictReader(fh):
                per_epoch[int(row["epoch"])].append(float(row["recon"]))
                adv[int(row["epoch"])].append(float(row["adv_G"]))
        epochs = sorted(per_epoch)
        fig, ax = plt.subplots(figsize=(3.6, 2.6))
        ax.plot(epochs, [np.mean(per_epoch[e]) for e in epochs], label="reconstruction")
        ax.plot(epochs, [np.mean(adv[e]) for e in epochs], label="adversarial G")
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        ax.set_title(csv_path.stem.replace("history_", ""), fontsize=9)
        ax.legend(fontsize=7)
        fig.tight_layout()
        out = fig_dir / (csv_path.stem.replace("history", "loss") + ".png")
        fig.savefig(out, dpi=100)
        plt.close(fig)
        written.append(out)
    return written


def _metric_bars(clf_rows: list[dict], fig_dir: Path) -> Path | None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ok = [r for r in clf_rows if r.get("status") == "ok"]
    if not ok:
        return None
    metrics = ["accuracy", "precision", "recall", "f1"]
    x = np.arange(len(ok))
    width = 0.2
    fig, ax = plt.subplots(figsize=(4.2, 2.8))
    for i, metric in enumerate(metrics):
        ax.bar(x + (i - 1.5) * width, [r[metric] for r in ok], width, label=metric)
    ax.set_xticks(x, [r["model"] for r in ok], fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    out = fig_dir / "classifier_metrics.png"
    fig.savefig(out, dpi=100)
    plt.close(fig)
    return out


def render_report(run_dir: str | Path) -> dict:
    """Write report/report.md plus figures from the artifacts present.

    The markdown is a pure function of the metric JSONs and the run
    identity, so re-rendering an unchanged run is byte-identical.
    """
    run_dir = Path(run_dir)
    record = RunRecord.load(run_dir)
    gen_path = run_dir / GEN_REPORT
    clf_path = run_dir / CLF_REPORT
    seg_path = run_dir / SEG_REPORT
    if not any(p.exists() for p in (gen_path, clf_path, seg_path)):
        raise DependencyError("no evaluation artifacts to report; run an eval stage first")

    report_dir = run_dir / "report"
    fig_dir = report_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)

    lines = [
        "# Crop disease synthesis pipeline report",
        "",
        f"Run `{record.run_id}`, config `{record.config_hash}`.",
        "",
        "Stage completion: "
        + ", ".join(f"{k}:{'done' if v else 'pending'}"
                    for k, v in sorted(record.stages.items())),
        "",
    ]
    written: list[Path] = []

    if gen_path.exists():
        rows = json.loads(gen_path.read_text())
        lines += ["## Generated-image quality", ""]
        lines += generation_table(rows)
        lines.append("")

    if clf_path.exists():
        rows = json.loads(clf_path.read_text())
        lines += ["## Classifier benchmark", ""]
        lines += classification_table(rows)
        eval_sets = sorted({r.get("eval_set", "?") for r in rows})
        avg = sorted({r.get("averaging", "?") for r in rows})
        lines += ["", f"Averaging: {', '.join(avg)}; evaluation set: "
                      f"{', '.join(eval_sets)}.", ""]
        bars = _metric_bars(rows, fig_dir)
        if bars:
            lines += [f"![classifier metrics](figures/{bars.name})", ""]
            written.append(bars)

    if seg_path.exists():
        doc = json.loads(seg_path.read_text())
        lines += ["## Segmentation evaluation", ""]
        lines += segmentation_table(doc)
        lines += ["", f"Dice aggregation: {doc['dice_aggregation']} at mask IoU "
                      f">= {doc['dice_iou_threshold']}.", ""]

    curves = _loss_curves(run_dir, fig_dir)
    if curves:
        lines += ["## Training loss curves", ""]
        lines += [f"![{c.stem}](figures/{c.name})" for c in curves]
        lines.append("")
        written += curves

    if (run_dir / CAM_GRID).exists():
        lines += ["## Explanation grid", "",
                  f"See `{CAM_GRID}` (rows: model x image, columns: methods).", ""]

    seg_overlays = sorted((run_dir / "stage5_seg" / "overlays").glob("*.png"))
    if seg_overlays:
        lines += ["## Segmentation overlays", ""]
        lines += [f"- `{p.relative_to(run_dir)}`" for p in seg_overlays]
        lines.append("")

    md_path = report_dir / "report.md"
    md_path.write_text("\n".join(lines))
    return {"markdown": str(md_path), "figures": [str(p) for p in written]}
