"""Fit a verdict threshold on one zoo, then apply it to unseen models.

Scans a labeled calibration zoo, sweeps the F1-optimal threshold over the
mean-entropy scores, and checks how the frozen threshold generalizes to a
second zoo drawn with a different seed.

    python3 demos/calibrate_and_deploy.py
"""
from dataclasses import replace

from boundaryscan import (
    ScanParams,
    calibrate_threshold,
    gen_pool,
    gen_zoo,
    load_oracle,
    scan,
    verdict,
)
from boundaryscan.rng import derive_seed

PARAMS = ScanParams(n_plots=10, density=60)


def zoo_scores(zoo_seed: int):
    scores, flags, names = [], [], []
    for i, entry in enumerate(gen_zoo(zoo_seed, 6, 6, n=10, d=64)):
        oracle = load_oracle(entry.config)
        pool = gen_pool(oracle.model, seed=entry.pool_seed)
        report = scan(oracle, pool,
                      replace(PARAMS, seed=derive_seed(PARAMS.seed, i)))
        scores.append(report.aggregate.mean_re)
        flags.append(entry.ground_truth == "backdoored")
        names.append(entry.model_id)
    return scores, flags, names


cal_scores, cal_flags, _ = zoo_scores(101)
result = calibrate_threshold(cal_scores, cal_flags, resamples=50, seed=0)
print(f"calibrated gamma = {result.gamma_bar:.4f} "
      f"(F1 on calibration zoo = {result.f1_at_gamma:.3f})")

test_scores, test_flags, test_names = zoo_scores(202)
hits = 0
for name, score, truth in zip(test_names, test_scores, test_flags):
    call = verdict(score, result.gamma_bar)
    ok = (call == "backdoored") == truth
    hits += ok
    print(f"  {name:>13}  mean_re={score:7.4f}  -> {call:10}"
          f"  [{'ok' if ok else 'MISS'}]")
print(f"held-out accuracy: {hits}/{len(test_names)}")
