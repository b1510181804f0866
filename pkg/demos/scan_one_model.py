"""Scan a clean and a backdoored synthetic model and compare the output.

Run from the repository root:

    python3 demos/scan_one_model.py
"""
from boundaryscan import ScanParams, gen_pool, load_oracle, scan

PARAMS = ScanParams(n_plots=10, density=60, seed=0)
THRESHOLD_RE = 0.873

for kind, config in (
    ("clean", {"kind": "synthetic-clean", "seed": 11,
               "n_classes": 10, "d": 128}),
    ("backdoored", {"kind": "synthetic-backdoor", "seed": 11,
                    "n_classes": 10, "d": 128,
                    "target": 4, "strength": 0.8}),
):
    oracle = load_oracle(config)
    pool = gen_pool(oracle.model, seed=1)
    report = scan(oracle, pool, PARAMS,
                  threshold_re=THRESHOLD_RE, model_id=kind)

    print(f"--- {kind} model ---")
    print(f"mean entropy     : {report.aggregate.mean_re:.4f}")
    print(f"mean anchor area : {report.aggregate.mean_ats:.4f}")
    print(f"verdict (gamma={THRESHOLD_RE}): {report.verdict_re}")
    print(f"suspected target : {report.target_label}")
    print()

print("The planted target was class 4; a low mean entropy means the label")
print("maps collapsed toward a single class, which is the backdoor tell.")
