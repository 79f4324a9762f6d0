"""Spike-assisted contextual information extraction (ScieNet).

An unsupervised spiking network learns conductance matrices from clean
images; a pre-processor turns any image into a context-blended template
for a downstream classifier.
"""

from .backend import compiled_available
from .config import (
    ContextConfig,
    EncoderConfig,
    InhibitionParams,
    LifParams,
    MlpConfig,
    PipelineConfig,
    StdpParams,
    load_config,
)
from .network import PresentationTrace, SnnModel, run_presentation, synaptic_current

__version__ = "0.1.0"
