"""Local DCT features and Dunn-driven patch selection."""
import numpy as np

from dopplerclust.clustering import ClustererConfig
from dopplerclust.data import generate_synthetic
from dopplerclust.features import DctPatchPlan, extract_local_dct, select_best_dct_patch

ds = generate_synthetic(seed=42)
images = ds.images()

plan = DctPatchPlan(patch_size=40, patch_index=0)
f = extract_local_dct(images[0], plan)
print(f"{plan.patch_size}x{plan.patch_size} patch #{plan.patch_index} -> {f.size} coefficients")
print("DC terms of the nine sub-patches:", np.round(f.reshape(9, 6)[:, 0], 3))

best, scores = select_best_dct_patch(images, clusterer_config=ClustererConfig("kmeans", 5),
                                     seed=0, return_scores=True)
ranked = sorted(scores.items(), key=lambda kv: -kv[1])[:5]
print("\nhighest Dunn's index over all 85 candidate patches:")
for p, s in ranked:
    print(f"  {p.patch_size:2d}x{p.patch_size:<2d} #{p.patch_index:<2d} origin {p.origin}  dunn {s:.4f}")
print(f"selected: {best.patch_size}x{best.patch_size} patch #{best.patch_index}")
