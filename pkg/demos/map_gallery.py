"""Render decision-boundary maps for a clean and a backdoored model.

Writes PNGs under demos/out/gallery/. Each map colors a 2D plane through
three clean samples by predicted class; the three white squares mark the
samples themselves. Clean planes show several regions, backdoored planes
are mostly one color.

    python3 demos/map_gallery.py
"""
from pathlib import Path

from boundaryscan import (
    ScanParams,
    gen_pool,
    load_oracle,
    plot_filename,
    render_image,
    scan,
)

OUT = Path(__file__).parent / "out" / "gallery"
PARAMS = ScanParams(n_plots=6, density=80, seed=3)

for kind, config in (
    ("clean", {"kind": "synthetic-clean", "seed": 21,
               "n_classes": 10, "d": 64}),
    ("backdoored", {"kind": "synthetic-backdoor", "seed": 21,
                    "n_classes": 10, "d": 64,
                    "target": 7, "strength": 0.8}),
):
    oracle = load_oracle(config)
    pool = gen_pool(oracle.model, seed=2)

    def sink(k, bmap, kind=kind):
        path = OUT / plot_filename(kind, k)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(render_image(bmap, upscale=4))

    report = scan(oracle, pool, PARAMS, model_id=kind, map_sink=sink)
    print(f"{kind:>10}: mean_re={report.aggregate.mean_re:.4f}  "
          f"maps -> {OUT / kind}")
