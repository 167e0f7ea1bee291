"""Reverberation-preserving speech restoration toolkit.

Thin package over the ``_reverbkit`` extension: room impulse response
simulation and analysis, degradation synthesis, the reverb encoder/decoder
model, feature-space tools, and evaluation metrics.
"""

try:
    # Installed layout: the extension lives inside this package.
    from ._reverbkit import *  # noqa: F401,F403
    from ._reverbkit import __version__  # noqa: F401
except ImportError:
    # Development layout: the extension is built in the CMake tree and put on
    # sys.path directly (e.g. PYTHONPATH=build/bindings).
    from _reverbkit import *  # noqa: F401,F403
    from _reverbkit import __version__  # noqa: F401
