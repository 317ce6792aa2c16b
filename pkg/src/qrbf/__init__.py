"""Tensor-product-weight RBF network classifier with an exact circuit-level
emulator, full-weight least-squares and SVM baselines, and an experiment
harness for binary-classification benchmarks."""

from ._accel import active_backend
from .datasets import Dataset, PatternSpec, Sample, generate, load_csv, save_csv, split
from .kernel import (DensityOperator, KernelModel, build_kernel_model, density_operator,
                     feature_matrix, feature_state, feature_vector, sigma_heuristic)
from .tensorweight import (fast_inner, materialize, num_factors, shift_derivative,
                           weight_entry, weight_with_derivatives)
from .train import (DivergenceError, LossConfig, TrainReport, gradient, hessian, loss,
                    predict_full, predict_tensor, train_full_lstsq, train_gd, train_newton)
from .qsim import (QubitState, ReadoutResult, TruncatedCoherentState, apply_weight_unitary,
                   build_rho_from_coherent, coherent_overlap, coherent_truncate,
                   coherent_vector, grad_quantities, hadamard_test_readout)
from .svm import (DualSolution, TensorSvmConfig, TensorSvmSolution, decision_value,
                  decision_values, dual_objective, kernel_matrix, solve_dual,
                  solve_tensor_svm)
from .experiments import (ExperimentConfig, ExperimentReport, Metrics, export_decision_grid,
                          mse_score, rcp_score, run_experiment, sweep_m)

__version__ = "0.1.0"
