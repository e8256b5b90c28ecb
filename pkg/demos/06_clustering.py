"""
Clustering measured nodes by eigenvector ratios
===============================================

Ratios of Laplacian eigenvector components at the measured nodes place
nodes of the same community close together. The bundled clustering
scenario runs the whole pipeline and scores the labels.
"""
import tempfile
import warnings

from specnet import pipeline

warnings.simplefilter("ignore", RuntimeWarning)
for seed in range(3):
    sc = pipeline.load_bundled("clustering", seed_override=seed)
    rep = pipeline.run_pipeline(sc, tempfile.mkdtemp()).report["clustering"]
    print(f"seed {seed}: {rep['correct']} of {rep['total']} measured nodes correct")
