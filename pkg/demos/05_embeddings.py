"""2-D views of raw spectrograms and of local DCT features."""
import numpy as np

from dopplerclust.clustering import ClustererConfig
from dopplerclust.data import generate_synthetic
from dopplerclust.features import ExtractorConfig
from dopplerclust.manifold import lle, mds, tsne

ds = generate_synthetic(seed=42)
dct = ExtractorConfig("local_dct").fit(ds.X, k=5, seed=0).transform(ds.X)


def class_ratio(Y, labels):
    # mean within-class distance over mean between-class distance
    D = np.sqrt(((Y[:, None] - Y[None]) ** 2).sum(-1))
    same = labels[:, None] == labels[None]
    return D[same].mean() / D[~same].mean()


for name, F in (("raw", ds.X), ("local_dct", dct)):
    for method, run in (("tsne", lambda F: tsne(F, perplexity=15, seed=0)),
                        ("mds", lambda F: mds(F, seed=0)),
                        ("lle", lambda F: lle(F, p_neighbors=10))):
        emb = run(F)
        print(f"{name:9s} {method:4s} loss {emb.final_loss:10.4f}  "
              f"within/between distance {class_ratio(emb.coords, ds.labels):.3f}")

# LLE lands every class on a single point here: the 10-nearest-neighbour
# graph splits into one component per class, so the bottom eigenvectors are
# per-class indicators and the reconstruction cost is zero.

with open("embedding_tsne_local_dct.csv", "w") as fh:
    fh.write(tsne(dct, seed=0).to_csv(labels=ds.labels))
print("wrote embedding_tsne_local_dct.csv")
