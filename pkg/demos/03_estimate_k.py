"""How many activities are there? Sweep K and let three indices vote."""
from dopplerclust.data import generate_synthetic
from dopplerclust.validity import sweep_k

ds = generate_synthetic(seed=42)
report = sweep_k(ds.X, range(2, 11), seed=0)

print(" K  distortion  silhouette  1/DB     dunn")
for row in report.rows():
    print(f"{row['k']:2d}  {row['distortion']:10.3f}  {row['silhouette']:10.3f}  "
          f"{row['inverse_davies_bouldin']:6.3f}  {row['dunn']:7.4f}")
print("\nvotes:", report.votes)
print("recommended K:", report.recommended_k)
# the distortion column is for eyeballing an elbow, it does not vote
