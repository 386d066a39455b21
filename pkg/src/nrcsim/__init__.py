"""Simulation library for channel non-reciprocity (NRC) in TDD massive MIMO.

Models frequency-response and mutual-coupling mismatches at the BS and UEs,
implements round-trip pilot signaling with iterative estimation of the
UE-side (A) and BS-side (B) NRC matrices, NRC-aware MRT/ZF precoding, two
reference LS calibration schemes, and a Monte-Carlo experiment harness.
"""

from .channel import (ChannelSet, NrcRealization, assemble_channels, draw_nrc,
                      gen_coupling_matrix, gen_fr_mismatch,
                      gen_physical_channel, identity_nrc)
from .dipole import impedance_matrix, mutual_impedance, self_impedance
from .estimation import (EstimationResult, estimate_A_step, estimate_B_step,
                         gen_pilot_matrix, iterate_estimate,
                         process_observation, roundtrip)
from .geometry import ArrayGeometry, SparsitySupport, build_support
from .harness import (MetricsRecord, ScenarioConfig, normalized_mse,
                      run_scenario, run_sweep, spectral_efficiency)
from .precoding import (LinkSample, Precoder, dl_transmit_receive,
                        effective_gain, instantaneous_sinr, make_precoder,
                        nrc_aware, qpsk_symbols, ul_train_and_estimate)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
