"""The six-stage pipeline commands operating on one run directory."""

from __future__ import annotations

import json
import logging
import zlib
from pathlib import Path

import cv2
import numpy as np
import torch

from ..clf import (
    ClassificationDataset,
    ClfTrainConfig,
    benchmark,
    make_adapter,
)
from ..cam import TorchModel, compute_cam, explain_grid, overlay
from ..data import (
    DatasetManifest,
    ImageSample,
    Label,
    PreprocessConfig,
    Provenance,
    Split,
    augment,
    export_coco,
    import_vgg_annotations,
    load_manifest,
    pair_images,
    preprocess,
    rasterize,
    split_dataset,
    write_corpus,
)
from ..errors import DatasetError, DependencyError
from ..gan import (
    GanTrainConfig,
    history_to_csv,
    load_checkpoint,
    train_cyclegan,
    train_pix2pix,
    translate,
)
from ..genmetrics import make_extractor, score_generation
from ..seg import (
    InstanceRecord,
    SegEngineConfig,
    ap_report,
    dataset_dice,
    emit_engine_config,
    export_predictions,
    import_predictions,
    predict_blobs,
)
from .config import config_hash
from .runrecord import RunRecord

log = logging.getLogger(__name__)

ANNOTATIONS_FILENAME = "annotations_via.json"


def derive_seed(base: int, *tags: str) -> int:
    value = base & 0x7FFFFFFF
    for tag in tags:
        value = zlib.crc32(f"{value}:{tag}".encode()) & 0x7FFFFFFF
    return value


def dump_json(obj, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True))
    return path


def write_png(pixels: np.ndarray, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    cv2.imwrite(str(path), cv2.cvtColor(pixels, cv2.COLOR_RGB2BGR))
    return path


def read_png(path: Path) -> np.ndarray:
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise DatasetError(f"cannot read image {path}")
    return cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)


def masks_to_via_doc(masks: dict[str, np.ndarray], raw_size: int) -> dict:
    """Convert per-image boolean masks into a VGG-annotator project export.

    Each connected blotch becomes one polygon region; image dimensions ride
    along in file_attributes so importers can rescale coordinates.
    """
    doc: dict = {}
    for sample_id in sorted(masks):
        mask = masks[sample_id].astype(np.uint8)
        label = sample_id.split("/")[0]
        contours, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_SIMPLE)
        regions = []
        for contour in contours:
            approx = cv2.approxPolyDP(contour, 0.5, True).reshape(-1, 2)
            if len(approx) < 3 or cv2.contourArea(contour) < 4.0:
                continue
            regions.append({
                "shape_attributes": {
                    "name": "polygon",
                    "all_points_x": [float(x) for x, _ in approx],
                    "all_points_y": [float(y) for _, y in approx],
                },
                "region_attributes": {"class": label},
            })
        if regions:
            filename = f"{sample_id}.png"
            doc[filename] = {
                "filename": filename,
                "size": -1,
                "regions": regions,
                "file_attributes": {"width": raw_size, "height": raw_size},
            }
    return doc


class PipelineRun:
    """One run directory plus its record; commands are methods."""

    def __init__(self, cfg: dict, run_id: str, force: bool = False):
        self.cfg = cfg
        self.force = force
        self.run_id = run_id
        self.run_root = Path(cfg["run_root"])
        self.run_dir = self.run_root / run_id
        self.record = RunRecord.open_or_create(
            self.run_dir, run_id, config_hash(cfg), force=force)

    # ---------- shared plumbing ----------

    def _should_skip(self, command: str) -> bool:
        if self.force:
            return False
        if self.record.artifacts_valid(command, self.run_dir):
            log.info("%s already complete for run %s; skipping (use --force to redo)",
                     command, self.run_id)
            return True
        return False

    def _finish(self, command: str, outputs: list[Path]) -> None:
        self.record.mark_completed(command, self.run_dir, outputs)
        self.record.save(self.run_dir)

    def _seed(self, *tags: str) -> int:
        return derive_seed(int(self.cfg["seed"]), *tags)

    def _preprocess_cfg(self) -> PreprocessConfig:
        p = self.cfg["preprocess"]
        size = int(p["target_size"])
        return PreprocessConfig(
            target_size=(size, size),
            bilateral_diameter=int(p["bilateral_diameter"]),
            bilateral_sigma_color=float(p["bilateral_sigma_color"]),
            bilateral_sigma_space=float(p["bilateral_sigma_space"]),
            stretch_low_percentile=float(p["stretch_low_percentile"]),
            stretch_high_percentile=float(p["stretch_high_percentile"]),
            clahe_clip_limit=float(p["clahe_clip_limit"]),
            clahe_tile_grid=(int(p["clahe_tile_grid"]), int(p["clahe_tile_grid"])),
        )

    def _load_manifest_with_pixels(self) -> DatasetManifest:
        manifest = DatasetManifest.load(self.run_dir / "stage1_data" / "manifest.json")
        for sample in manifest.samples:
            sample.pixels = read_png(Path(sample.path))
        return manifest

    def _extractor(self):
        g = self.cfg["gen_metrics"]
        if g["extractor"] == "random_projection":
            return make_extractor("random_projection", dim=int(g["extractor_dim"]),
                                  n_classes=3, seed=self._seed("extractor"))
        return make_extractor(g["extractor"])

    # ---------- stage 1 ----------

    def cmd_preprocess(self) -> None:
        self.record.require_dependencies("preprocess")
        if self._should_skip("preprocess"):
            return
        dataset_cfg = self.cfg["dataset"]
        root = Path(dataset_cfg["root"])
        synthetic = dataset_cfg["synthetic"]
        if synthetic["enabled"] and not root.is_dir():
            counts = {Label(k): int(v) for k, v in synthetic["counts"].items()}
            masks = write_corpus(root, counts, seed=self._seed("corpus"),
                                 size=int(synthetic["size"]))
            via = masks_to_via_doc(masks, int(synthetic["size"]))
            dump_json(via, root / ANNOTATIONS_FILENAME)

        manifest = load_manifest(root)
        pcfg = self._preprocess_cfg()
        processed = [preprocess(s, pcfg) for s in manifest.samples]

        aug_cfg = self.cfg["augment"]
        children: list[ImageSample] = []
        if aug_cfg["ops"]:
            aug_seed = self._seed("augment")
            for sample in processed:
                children.extend(augment(sample, list(aug_cfg["ops"]), seed=aug_seed,
                                        cfg=pcfg))
        manifest = DatasetManifest(samples=processed + children,
                                   errors=manifest.errors)
        split_dataset(manifest, ratio=float(self.cfg["split"]["ratio"]),
                      seed=self._seed("split"))

        stage_dir = self.run_dir / "stage1_data"
        outputs: list[Path] = []
        for sample in manifest.samples:
            path = write_png(sample.require_pixels(), stage_dir / "images" / f"{sample.id}.png")
            sample.path = str(path)
            outputs.append(path)
        manifest_path = stage_dir / "manifest.json"
        manifest_path.parent.mkdir(parents=True, exist_ok=True)
        manifest.save(manifest_path)
        outputs.append(manifest_path)
        self._finish("preprocess", outputs)

    def cmd_pair(self) -> None:
        self.record.require_dependencies("pair")
        if self._should_skip("pair"):
            return
        manifest = DatasetManifest.load(self.run_dir / "stage1_data" / "manifest.json")
        healthy = manifest.subset(label=Label.HEALTHY, split=Split.TRAIN)
        k = int(self.cfg["pair"]["k"])
        rows = []
        for disease in self.cfg["gan"]["diseases"]:
            diseased = manifest.subset(label=Label(disease), split=Split.TRAIN)
            pairs = pair_images(healthy, diseased, k=k,
                                seed=self._seed("pair", disease))
            rows += [{"input": p.input_id, "target": p.target_id,
                      "disease": p.disease.value} for p in pairs]
        path = dump_json({"k": k, "pairs": rows},
                         self.run_dir / "stage1_data" / "pairs.json")
        self._finish("pair", [path])

    # ---------- stage 2 ----------

    def _gan_cfg(self, model: str) -> dict:
        gan = self.cfg["gan"]
        params = dict(gan[model])
        params.update(
            image_size=int(gan["image_size"]),
            base_channels=int(gan["base_channels"]),
            d_base_channels=int(gan["d_base_channels"]),
            depth=int(gan["depth"]),
            n_blocks=int(gan["n_blocks"]),
        )
        return params

    def cmd_train_gan(self) -> None:
        self.record.require_dependencies("train_gan")
        if self._should_skip("train_gan"):
            return
        manifest = self._load_manifest_with_pixels()
        by_id = manifest.by_id()
        pairs_doc = json.loads((self.run_dir / "stage1_data" / "pairs.json").read_text())
        stage_dir = self.run_dir / "stage2_gan"
        outputs: list[Path] = []
        for model in self.cfg["gan"]["models"]:
            for disease in self.cfg["gan"]["diseases"]:
                params = self._gan_cfg(model)
                cfg = GanTrainConfig(model=model, seed=self._seed(model, disease),
                                     **params)
                ckpt_dir = stage_dir / "checkpoints" / f"{model}_{disease}"
                if model == "pix2pix":
                    pairs = [
                        (by_id[row["input"]].require_pixels(),
                         by_id[row["target"]].require_pixels())
                        for row in pairs_doc["pairs"] if row["disease"] == disease
                    ]
                    _, history = train_pix2pix(pairs, cfg, out_dir=ckpt_dir,
                                               disease=disease)
                else:
                    healthy = [s.require_pixels() for s in
                               manifest.subset(label=Label.HEALTHY, split=Split.TRAIN)]
                    diseased = [s.require_pixels() for s in
                                manifest.subset(label=Label(disease), split=Split.TRAIN)]
                    _, history = train_cyclegan(healthy, diseased, cfg,
                                                out_dir=ckpt_dir, disease=disease)
                csv_path = stage_dir / f"history_{model}_{disease}.csv"
                history_to_csv(history, csv_path)
                outputs.append(csv_path)
                outputs.extend(sorted(ckpt_dir.iterdir()))
        self._finish("train_gan", outputs)

    def _final_checkpoint(self, model: str, disease: str) -> Path:
        ckpt_dir = self.run_dir / "stage2_gan" / "checkpoints" / f"{model}_{disease}"
        candidates = sorted(ckpt_dir.glob("epoch-*.pt"),
                            key=lambda p: int(p.stem.split("-")[1]))
        if not candidates:
            raise DependencyError(f"no checkpoints for {model}/{disease}; run train_gan")
        return candidates[-1]

    def cmd_generate(self) -> None:
        self.record.require_dependencies("generate")
        if self._should_skip("generate"):
            return
        manifest = self._load_manifest_with_pixels()
        healthy = [s for s in manifest.samples
                   if s.label == Label.HEALTHY and s.provenance == Provenance.PREPROCESSED]
        healthy.sort(key=lambda s: s.id)
        per_combo = int(self.cfg["generate"]["per_combo"])
        select_top = int(self.cfg["generate"]["select_top"])
        extractor = self._extractor()
        stage_dir = self.run_dir / "stage2_gan" / "generated"
        outputs: list[Path] = []
        entries = []
        for model in self.cfg["gan"]["models"]:
            for disease in self.cfg["gan"]["diseases"]:
                ckpt_path = self._final_checkpoint(model, disease)
                checkpoint = load_checkpoint(ckpt_path)
                real = [s.require_pixels() for s in manifest.samples
                        if s.label == Label(disease)
                        and s.provenance == Provenance.PREPROCESSED]
                real_mean = extractor.embed(np.stack(real)).mean(axis=0)
                combo_entries = []
                for source in healthy[:per_combo]:
                    generated = translate(source, checkpoint, disease)
                    stem = source.id.split("/")[-1]
                    png = write_png(generated.require_pixels(),
                                    stage_dir / model / disease / f"{stem}.png")
                    sidecar = dump_json(
                        {"source_id": source.id, "direction": disease,
                         "checkpoint": str(ckpt_path.relative_to(self.run_dir)),
                         "model": model},
                        png.with_suffix(".json"))
                    feature = extractor.embed(generated.require_pixels()[None])[0]
                    proxy = float(np.linalg.norm(feature - real_mean))
                    combo_entries.append({
                        "id": generated.id, "model": model, "disease": disease,
                        "path": str(png), "source_id": source.id,
                        "split": source.split.value, "proxy_distance": proxy,
                    })
                    outputs += [png, sidecar]
                # scripted stand-in for manual curation: keep the closest to real
                combo_entries.sort(key=lambda e: (e["proxy_distance"], e["id"]))
                for rank, entry in enumerate(combo_entries):
                    entry["selected"] = rank < select_top
                entries += sorted(combo_entries, key=lambda e: e["id"])
        gen_manifest = dump_json(
            {"selection": "top_by_feature_proximity", "entries": entries},
            self.run_dir / "stage2_gan" / "gen_manifest.json")
        outputs.append(gen_manifest)
        self._finish("generate", outputs)

    # ---------- stage 3 ----------

    def cmd_eval_gen(self) -> None:
        self.record.require_dependencies("eval_gen")
        if self._should_skip("eval_gen"):
            return
        manifest = self._load_manifest_with_pixels()
        gen_doc = json.loads(
            (self.run_dir / "stage2_gan" / "gen_manifest.json").read_text())
        extractor = self._extractor()
        rows = []
        for model in self.cfg["gan"]["models"]:
            for disease in self.cfg["gan"]["diseases"]:
                real = np.stack([
                    s.require_pixels() for s in manifest.samples
                    if s.label == Label(disease)
                    and s.provenance == Provenance.PREPROCESSED])
                gen = np.stack([
                    read_png(Path(e["path"])) for e in gen_doc["entries"]
                    if e["model"] == model and e["disease"] == disease and e["selected"]])
                report = score_generation(real, gen, extractor,
                                          splits=int(self.cfg["gen_metrics"]["splits"]))
                rows.append({"model": model, "disease_class": disease, **report})
        rows.sort(key=lambda r: (r["model"], r["disease_class"]))
        path = dump_json(rows, self.run_dir / "stage3_genmetrics" / "gen_report.json")
        self._finish("eval_gen", [path])

    # ---------- stage 6 (classifier training feeds stage 4) ----------

    def _class_names(self) -> list[str]:
        names = list(self.cfg["gan"]["diseases"])
        if self.cfg["classifier"]["include_healthy"]:
            names = ["healthy"] + names
        return names

    def _clf_dataset(self) -> ClassificationDataset:
        manifest = self._load_manifest_with_pixels()
        class_names = self._class_names()
        index = {name: i for i, name in enumerate(class_names)}
        gen_doc = json.loads(
            (self.run_dir / "stage2_gan" / "gen_manifest.json").read_text())

        def collect(split: str, include_generated: bool):
            images, labels = [], []
            for s in manifest.samples:
                if s.split.value == split and s.label.value in index:
                    images.append(s.require_pixels())
                    labels.append(index[s.label.value])
            if include_generated:
                for e in gen_doc["entries"]:
                    if e["selected"] and e["split"] == split and e["disease"] in index:
                        images.append(read_png(Path(e["path"])))
                        labels.append(index[e["disease"]])
            return np.stack(images), np.array(labels)

        eval_on = self.cfg["classifier"]["eval_on"]
        train_images, train_labels = collect("train", include_generated=True)
        test_images, test_labels = collect(
            "test", include_generated=(eval_on == "real_plus_generated_test"))
        return ClassificationDataset(train_images, train_labels,
                                     test_images, test_labels, class_names)

    def cmd_train_clf(self) -> None:
        self.record.require_dependencies("train_clf")
        if self._should_skip("train_clf"):
            return
        clf_cfg = self.cfg["classifier"]
        dataset = self._clf_dataset()
        adapters = []
        for name in clf_cfg["adapters"]:
            kwargs = {"width": int(clf_cfg["width"])} if name == "tiny_cnn" else {}
            adapters.append(make_adapter(name, n_classes=len(dataset.class_names),
                                         **kwargs))
        train_cfg = ClfTrainConfig(
            learning_rate=float(clf_cfg["learning_rate"]),
            batch_size=int(clf_cfg["batch_size"]),
            epochs=int(clf_cfg["epochs"]),
            seed=self._seed("classifier"),
        )
        reports = benchmark(adapters, dataset, train_cfg,
                            averaging=clf_cfg["averaging"],
                            eval_set=clf_cfg["eval_on"])
        stage_dir = self.run_dir / "stage6_clf"
        outputs = [dump_json([r.to_dict() for r in reports],
                             stage_dir / "clf_reports.json")]
        for adapter, report in zip(adapters, reports):
            if report.status != "ok":
                continue
            ckpt = stage_dir / "checkpoints" / f"{adapter.name}.pt"
            ckpt.parent.mkdir(parents=True, exist_ok=True)
            torch.save(adapter.state_dict(), ckpt)
            outputs.append(ckpt)
            csv_path = stage_dir / f"confusion_{adapter.name}.csv"
            np.savetxt(csv_path, np.asarray(report.confusion, dtype=np.int64),
                       fmt="%d", delimiter=",",
                       header=",".join(dataset.class_names), comments="")
            outputs.append(csv_path)
            outputs.append(self._confusion_png(report, dataset.class_names,
                                               stage_dir / f"confusion_{adapter.name}.png"))
        self._finish("train_clf", outputs)

    @staticmethod
    def _confusion_png(report, class_names: list[str], path: Path) -> Path:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        counts = np.asarray(report.confusion)
        fig, ax = plt.subplots(figsize=(3.2, 2.8))
        ax.imshow(counts, cmap="Blues")
        for i in range(counts.shape[0]):
            for j in range(counts.shape[1]):
                ax.text(j, i, str(counts[i, j]), ha="center", va="center", fontsize=8)
        ax.set_xticks(range(len(class_names)), class_names, rotation=45, fontsize=7)
        ax.set_yticks(range(len(class_names)), class_names, fontsize=7)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        ax.set_title(report.name, fontsize=9)
        fig.tight_layout()
        fig.savefig(path, dpi=100)
        plt.close(fig)
        return path

    # ---------- stage 4 ----------

    def cmd_explain(self) -> None:
        self.record.require_dependencies("explain")
        if self._should_skip("explain"):
            return
        cam_cfg = self.cfg["cam"]
        manifest = self._load_manifest_with_pixels()
        ckpt_dir = self.run_dir / "stage6_clf" / "checkpoints"
        models = []
        for name in self.cfg["classifier"]["adapters"]:
            path = ckpt_dir / f"{name}.pt"
            if not path.exists():
                continue
            adapter = make_adapter(name, n_classes=len(self._class_names()))
            adapter.load_state_dict(torch.load(path, weights_only=False))
            if getattr(adapter, "net", None) is None:
                log.info("adapter %s has no differentiable network; skipping CAM", name)
                continue
            models.append((name, TorchModel(adapter.net)))
        if not models:
            raise DependencyError("no differentiable classifier checkpoints to explain")

        diseased = [s for s in manifest.samples
                    if s.label != Label.HEALTHY and s.split == Split.TEST
                    and s.provenance == Provenance.PREPROCESSED]
        diseased.sort(key=lambda s: s.id)
        images = diseased[: int(cam_cfg["n_images"])]
        grid, grid_manifest = explain_grid(
            models, list(cam_cfg["methods"]), images,
            layer=cam_cfg["layer"], class_index=cam_cfg["class_index"],
            alpha=float(cam_cfg["alpha"]), colormap=cam_cfg["colormap"])

        stage_dir = self.run_dir / "stage4_cam"
        outputs = [write_png(grid, stage_dir / "cam_grid.png"),
                   dump_json(grid_manifest, stage_dir / "cam_grid.json")]
        for model_name, model in models:
            for method in cam_cfg["methods"]:
                for sample in images:
                    heatmap = compute_cam(method, model, sample.require_pixels(),
                                          class_index=cam_cfg["class_index"],
                                          layer=cam_cfg["layer"])
                    tile = overlay(heatmap, sample.require_pixels(),
                                   alpha=float(cam_cfg["alpha"]),
                                   colormap=cam_cfg["colormap"])
                    stem = sample.id.replace("/", "_")
                    outputs.append(write_png(
                        tile, stage_dir / "overlays" / f"{stem}__{model_name}__{method}.png"))
        self._finish("explain", outputs)

    # ---------- stage 5 ----------

    def _load_annotations(self, manifest: DatasetManifest):
        via_path = Path(self.cfg["dataset"]["root"]) / ANNOTATIONS_FILENAME
        if not via_path.exists():
            raise DependencyError(
                f"no annotation file at {via_path}; provide VGG-annotator polygons")
        doc = json.loads(via_path.read_text())
        annotations = import_vgg_annotations(doc)
        target = int(self.cfg["preprocess"]["target_size"])
        # rescale polygon coordinates from raw resolution to preprocessed
        for entry in doc.values():
            if not isinstance(entry, dict) or "regions" not in entry:
                continue
            raw_h = entry.get("file_attributes", {}).get("height")
            if not raw_h or float(raw_h) == target:
                continue
            scale = target / float(raw_h)
            image_id = entry["filename"].rsplit(".", 1)[0]
            for ann in annotations:
                if ann.image_id == image_id:
                    ann.polygon = [(x * scale, y * scale) for x, y in ann.polygon]
        known = manifest.by_id()
        return [a for a in annotations if a.image_id in known]

    def cmd_eval_seg(self) -> None:
        self.record.require_dependencies("eval_seg")
        if self._should_skip("eval_seg"):
            return
        seg_cfg = self.cfg["segmentation"]
        manifest = self._load_manifest_with_pixels()
        annotations = self._load_annotations(manifest)
        size = int(self.cfg["preprocess"]["target_size"])
        by_id = manifest.by_id()
        stage_dir = self.run_dir / "stage5_seg"
        stage_dir.mkdir(parents=True, exist_ok=True)
        outputs: list[Path] = []

        split_of = {sid: by_id[sid].split for sid in by_id}
        train_anns = [a for a in annotations if split_of[a.image_id] == Split.TRAIN]
        test_anns = [a for a in annotations if split_of[a.image_id] == Split.TEST]
        if not test_anns:
            raise DatasetError("no annotated images landed in the test split")

        coco_train = export_coco(manifest, train_anns)
        coco_test = export_coco(manifest, test_anns)
        train_path = dump_json(coco_train, stage_dir / "coco_train.json")
        test_path = dump_json(coco_test, stage_dir / "coco_test.json")
        outputs += [train_path, test_path]

        n_train = len(coco_train["images"])
        for backbone in seg_cfg["backbones"]:
            engine_cfg = SegEngineConfig(
                backbone=backbone,
                learning_rate=float(seg_cfg["learning_rate"]),
                batch_size=int(seg_cfg["batch_size"]),
                epochs=int(seg_cfg["epochs"]),
                train_json=str(train_path),
                test_json=str(test_path),
                image_root=str(self.run_dir / "stage1_data" / "images"),
            )
            written = emit_engine_config(engine_cfg, n_train, stage_dir / "engine")
            outputs += [Path(written["config"]), Path(written["script"])]

        gts = [InstanceRecord(image_id=a.image_id, class_label=a.class_label,
                              mask=rasterize(a, (size, size)), score=1.0)
               for a in test_anns]
        image_numbers = {img["file_name"].rsplit(".", 1)[0]: img["id"]
                         for img in coco_test["images"]}
        category_numbers = {c["name"]: c["id"] for c in coco_test["categories"]}

        if seg_cfg["predictions_file"]:
            source = str(seg_cfg["predictions_file"])
            doc = json.loads(Path(source).read_text())
        else:
            source = "blob_standin"
            test_ids = sorted({a.image_id for a in test_anns})
            records = []
            for sid in test_ids:
                records += predict_blobs(by_id[sid])
            doc = export_predictions(records, image_numbers, category_numbers)
        pred_path = dump_json(doc, stage_dir / "predictions.json")
        outputs.append(pred_path)

        names_by_number = {v: k for k, v in image_numbers.items()}
        labels_by_number = {v: k for k, v in category_numbers.items()}
        sizes_by_number = {img["id"]: (img["height"], img["width"])
                           for img in coco_test["images"]}
        preds, errors = import_predictions(doc, names_by_number, labels_by_number,
                                           image_sizes=sizes_by_number)

        threshold = float(seg_cfg["iou_threshold"])
        evaluation = {
            "source": source,
            "import_errors": errors,
            "n_ground_truths": len(gts),
            "n_predictions": len(preds),
            "mask": ap_report(preds, gts, "mask"),
            "bbox": ap_report(preds, gts, "bbox"),
            "dice": dataset_dice(preds, gts, threshold=threshold),
            "dice_aggregation": "mean_over_matched_pairs_missed_gts_zero",
            "dice_iou_threshold": threshold,
        }
        eval_path = dump_json(evaluation, stage_dir / "seg_eval.json")
        outputs.append(eval_path)

        overlay_ids = sorted({g.image_id for g in gts})[: int(seg_cfg["n_overlays"])]
        for sid in overlay_ids:
            outputs.append(self._seg_overlay_png(
                by_id[sid], [p for p in preds if p.image_id == sid],
                [g for g in gts if g.image_id == sid],
                stage_dir / "overlays" / f"{sid.replace('/', '_')}.png"))
        self._finish("eval_seg", outputs)

    @staticmethod
    def _seg_overlay_png(sample: ImageSample, preds: list[InstanceRecord],
                         gts: list[InstanceRecord], path: Path) -> Path:
        canvas = sample.require_pixels().astype(np.float64)
        for gt in gts:
            canvas[gt.mask] = 0.6 * canvas[gt.mask] + 0.4 * np.array([0, 255, 0])
        for pred in preds:
            canvas[pred.mask] = 0.6 * canvas[pred.mask] + 0.4 * np.array([255, 0, 0])
        out = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        for pred in preds:
            x, y, w, h = (int(round(v)) for v in pred.bbox)
            cv2.rectangle(out, (x, y), (x + w, y + h), (255, 255, 255), 1)
            cv2.putText(out, f"{pred.score:.2f}", (x, max(y - 2, 8)),
                        cv2.FONT_HERSHEY_PLAIN, 0.7, (255, 255, 255), 1)
        return write_png(out, path)
