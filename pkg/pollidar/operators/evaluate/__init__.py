"""
评估操作符
"""

from pollidar.operators.evaluate.metrics import (
    ACCURACY_THRESHOLDS, REPORT_KEYS, MetricsReport, angular_errors, angular_metrics,
    distance_metrics, exact_median, evaluate, MetricsOperator,
)

__all__ = [
    'ACCURACY_THRESHOLDS',
    'REPORT_KEYS',
    'MetricsReport',
    'angular_errors',
    'angular_metrics',
    'distance_metrics',
    'exact_median',
    'evaluate',
    'MetricsOperator',
]
