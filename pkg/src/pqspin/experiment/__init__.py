from .config import DecoherenceConfig, SequenceConfig
from .metrics import SqueezingMetrics, angular_variance, metrics_from_variance, wineland_xi2
from .simulate import predict_metrics, run_three_pulse, run_two_pulse
