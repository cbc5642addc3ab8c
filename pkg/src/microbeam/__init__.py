"""Beamformed micro-Doppler classification of two people walking in opposite directions."""
from .array import ArrayGeometry, array_response, beam_weights, selection_weights, steering_vector
from .classify import ConfusionMatrix, NnModel, evaluate, predict
from .config import ExperimentConfig, profile_defaults
from .dsp import (GatePolicy, ProcessingConfig, Spectrogram, apply_beamformer, collapse_range,
                  process_beam, process_example, range_map, reshape_to_pri, select_gate, spectrogram)
from .errors import (ConfigurationError, DomainError, FormatError, InvariantError, MicrobeamError,
                     StructuralError)
from .features import FusedFeature, PcaModel, fit, fuse, normalize, project
from .scene import (DatasetConfig, RadarParams, RawDataCube, SceneSpec, WalkerSpec, make_dataset,
                    synthesize, walker_state)

__version__ = "0.1.0"
