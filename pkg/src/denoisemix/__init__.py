"""denoisemix: a deterministic multilingual denoising pretraining data pipeline.

Builds (noised source, clean target) training records from monolingual
corpora, parallel corpora, and bilingual dictionaries, with exponential
language/direction/task sampling and token-budget batching.
"""

from .kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
