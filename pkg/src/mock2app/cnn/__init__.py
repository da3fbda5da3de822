"""From-scratch convolutional classifier for GUI component crops."""

from .layers import (Conv2d, Dense, Flatten, MaxPool2x2, ReLU, softmax,
                     softmax_cross_entropy)
from .model import (DEFAULT_CONV_WIDTHS, DEFAULT_FC_WIDTH, DEFAULT_INPUT_SIZE,
                    CnnModel, build_cnn)
from .train import Dataset, TrainConfig, TrainLog, evaluate_accuracy, train

__all__ = [
    "Conv2d", "Dense", "Flatten", "MaxPool2x2", "ReLU", "softmax",
    "softmax_cross_entropy", "CnnModel", "build_cnn", "Dataset",
    "TrainConfig", "TrainLog", "evaluate_accuracy", "train",
    "DEFAULT_CONV_WIDTHS", "DEFAULT_FC_WIDTH", "DEFAULT_INPUT_SIZE",
]
