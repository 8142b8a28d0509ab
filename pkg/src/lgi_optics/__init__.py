"""Leggett-Garg correlators of classical and quantum light in a Mach-Zehnder interferometer."""

from .analytic import (AnalyticCurve, argmax_k, c12_coherent, c12_thermal, c13_coherent,
                       detector_error_threshold, golden_section_max, k_coherent, k_dephasing,
                       k_thermal, single_photon_k)
from .channels import (BeamSplitter, DephasingChannel, apply_beam_splitter, apply_dephasing,
                       click_update, negative_measurement_update)
from .fock import (Coherent, CutoffMismatch, DephasedCoherent, Fock, FockCutoff, InputSpec, Mode,
                   Thermal, TruncationError, TwoModeState, build_input_state, photon_weights,
                   required_cutoff, tail_mass)
from .montecarlo import (RunConfig, TrialRecord, estimate_correlators, expected_report,
                         noisy_k_study, sample_trial)
from .observables import (ClickPattern, CorrelatorReport, ExperimentConfig, Setup, assign_q,
                          click_distribution, correlator_c12, correlator_c13, correlator_c23,
                          evolve, k_exact)

__version__ = "0.1.0"
