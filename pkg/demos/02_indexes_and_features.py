"""From a denoised recording to band-ratio index series and their features.

    python demos/02_indexes_and_features.py
"""

import numpy as np

from mwlindex.bandindex import compute_indexes
from mwlindex.demo import DemoSpec, synth_recording
from mwlindex.featex import extract_features, full_catalog
from mwlindex.preprocess import denoise

spec = DemoSpec(n_samples=128 * 60)

# the same subject rated low and high; the high rating carries +50% frontal theta
for superoptimal in (False, True):
    rec = synth_recording(spec, subject_id=5, condition="Simkap", superoptimal=superoptimal)
    clean, _ = denoise(rec, seed=5)
    series = {s.index_id: s for s in compute_indexes(clean)}
    print(f"superoptimal={superoptimal}: ",
          ", ".join(f"{k} {np.mean(series[k].values):.3f}" for k in ("c1-theta", "c-alpha", "ta-1", "at-1")))

# ta-k and at-k are exact reciprocals window by window
print("max |ta-1 * at-1 - 1| =", np.max(np.abs(series["ta-1"].values * series["at-1"].values - 1)))

catalog = full_catalog()
fv = extract_features(series["ta-1"], catalog).as_dict()
print(f"{len(catalog)} features, e.g.")
for name in ("Mean", "Standard deviation", "Autocorrelation", "Spectral entropy", "Median frequency"):
    print(f"  {name:22s} {fv[name]: .4f}")
