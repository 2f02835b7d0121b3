"""Active learning of graph cuts: boundary-search sampling, spectral
sampling with label completion, and query-budget bounds."""

from .bench import (METHODS, TrialSummary, completion_error,
                    experiment_metadata, report, run_experiment, trial_seed)
from .cutstats import (BudgetReport, budget_bound, budget_bound_from_quantities,
                       build_meta_graph, cut_cluster_threshold, cut_edge_distance)
from .datasets import (FeatureDataset, GraphBundle, build_bundle,
                       gen_two_circles, knn_edge_keys, kth_neighbor_scale,
                       load_features_csv, pairwise_distances, save_features_csv)
from .graph import (CutStructure, GraphError, LabelSignal, WeightedGraph,
                    connected_components, cut_structure, distances,
                    graph_from_text, graph_to_text, labels_from_text,
                    labels_to_text, load_graph, load_labels, save_graph,
                    save_labels, shortest_path, strip_cut)
from .hybrid import HybridConfig, run_hybrid, stability_stat
from .s2 import (CompletionError, ExperimentRecord, S2Config, SamplerState,
                 SignalOracle, complete_by_components, ingest_sample, msp,
                 run_s2, write_query_log_csv)
from .spectral import (LaplacianModel, SoftLabels, SpectralConfig,
                       cutoff_greedy_select, estimated_cutoff,
                       pocs_reconstruct, threshold, write_eigenvalues_csv)

__version__ = "0.1.0"
