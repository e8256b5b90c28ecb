"""Laplacian spectrum identification of networked linear systems.

Modules
-------
graph        weighted digraphs, generators, Laplacians and exact spectra
dynamics     unit dynamics, network assembly, inputs and ZOH simulation
dmdc         delay-embedded dynamic mode decomposition with control
spectral_id  continuous-time eigenvalues, Laplacian eigenvalues, eigenvector ratios
analysis     spectral moments, convex-hull moments, degree bounds, clustering
pipeline     scenario files and the staged pipeline behind the CLI
cli          ``specnet`` command line entry point
"""
from . import analysis, dmdc, dynamics, graph, pipeline, spectral_id
from .errors import SpecnetError

__version__ = "0.1.0"

__all__ = ["analysis", "dmdc", "dynamics", "graph", "pipeline", "spectral_id",
           "SpecnetError", "__version__"]
