"""QND spin-squeezing simulator with forward filtering and past-quantum-state retrodiction."""

__version__ = "0.1.0"

from .errors import AccuracyError, ConfigurationError, ParameterError, StatisticalPowerError
from .gaussian import (
    EnsembleConfig,
    GaussianState,
    MeasurementModel,
    backaction_kick,
    filter_update,
    loss_channel,
    make_css,
    measure,
    rotate,
    sample_outcome,
)
from .pqs import (
    EffectState,
    OutcomePrediction,
    effect_absorb,
    effect_backpropagate_loss,
    effect_flat,
    predict_three_pulse,
    predict_two_pulse,
    retrodict,
)
