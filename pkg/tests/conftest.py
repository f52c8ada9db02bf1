import numpy as np
import pytest
import yaml

from cropgan.data import Label, generate_corpus
from cropgan.pipeline.cli import main as pipeline_main


@pytest.fixture(scope="session")
def small_corpus():
    """Shared in-memory corpus: 12 healthy + 5 + 5 diseased at 64 px."""
    counts = {Label.HEALTHY: 12, Label.BLACK_SCURF: 5, Label.COMMON_SCAB: 5}
    samples, masks = generate_corpus(counts, seed=11, size=64)
    return samples, masks


def random_mask(rng: np.random.Generator, shape=(32, 32), p=0.3) -> np.ndarray:
    return rng.random(shape) < p


def desk_pipeline_config(base_dir, seed=5):
    return {
        "seed": seed,
        "run_root": str(base_dir / "runs"),
        "dataset": {
            "root": str(base_dir / "raw"),
            "synthetic": {"counts": {"healthy": 14, "black_scurf": 6, "common_scab": 6},
                          "size": 48},
        },
        "preprocess": {"target_size": 48},
        "gan": {
            "image_size": 48,
            "base_channels": 8,
            "d_base_channels": 8,
            "n_blocks": 2,
            "pix2pix": {"epochs": 1, "learning_rate": 2e-4, "batch_size": 8,
                        "lambda_weight": 100.0},
            "cyclegan": {"epochs": 1, "learning_rate": 2e-4, "batch_size": 8,
                         "lambda_weight": 10.0, "least_squares": False},
        },
        "generate": {"per_combo": 3, "select_top": 2},
        "classifier": {"epochs": 2, "adapters": ["tiny_cnn"], "width": 8},
        "cam": {"n_images": 1},
        "pair": {"k": 2},
        "segmentation": {"n_overlays": 1},
    }


@pytest.fixture(scope="session")
def pipeline_runs(tmp_path_factory):
    """Two complete end-to-end runs from one config and seed."""
    import time

    base = tmp_path_factory.mktemp("pipeline")
    cfg = desk_pipeline_config(base)
    config_path = base / "config.yaml"
    config_path.write_text(yaml.safe_dump(cfg))
    durations = {}
    for run_id in ("run_a", "run_b"):
        started = time.time()
        code = pipeline_main(["run-all", "--config", str(config_path), "--run", run_id])
        durations[run_id] = time.time() - started
        assert code == 0, f"pipeline run {run_id} failed"
    return {
        "base": base,
        "config": config_path,
        "run_a": base / "runs" / "run_a",
        "run_b": base / "runs" / "run_b",
        "durations": durations,
    }
