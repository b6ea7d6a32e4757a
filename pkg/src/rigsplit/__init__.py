"""Two-fold mesh/controller clustering of blendshape rigs and per-cluster inverse rig solving."""
from .clustering import (Clustering, assign_controllers, cluster_mesh, cluster_model,
                         compress_controller, load_clustering, merge_overlapping,
                         save_clustering, whole_face)
from .errors import *  # noqa: F401,F403
from .kmeans import KMeansResult, kmeans, two_means_1d
from .metrics import SolveReport, controller_error, evaluate, mesh_error, structural_metrics
from .model_io import (AnimationSet, BlendshapeModel, Frame, load_animation, load_model,
                       save_animation, save_model, synthesize_mesh)
from .offsets import OffsetMatrix, compute_offsets
from .pipeline import SweepConfig, solve_clustered, solve_whole_face, sweep
from .solver import Prediction, SubmodelGPR, predict, predict_batch, solve_baseline, train
from .synth import SynthSpec, generate_animation, generate_model, generate_train_test

__version__ = "0.1.0"
