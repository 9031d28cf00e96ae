"""
Base ensemble class for Monte Carlo state generation
"""
from abc import ABC, abstractmethod
import logging

import numpy as np

from entanglement.rng import SeededRng

logger = logging.getLogger(__name__)


class BaseEnsemble(ABC):
    """
    Abstract base class for random two-qubit state ensembles
    """

    def __init__(self, ensemble_name: str):
        """
        Initialize ensemble

        Args:
            ensemble_name: Ensemble label ('mixed', 'pure-haar', 'separable')
        """
        self.ensemble_name = ensemble_name
        self.logger = logging.getLogger(f"{__name__}.{ensemble_name}")

    @property
    def label(self) -> str:
        """Label written into TallyResult records"""
        return self.ensemble_name

    @abstractmethod
    def draw(self, rng: SeededRng, n: int) -> np.ndarray:
        """
        Draw a chunk of density matrices

        Args:
            rng: Stream owned by the calling shard
            n: Number of states

        Returns:
            Array of shape (n, 4, 4)
        """
        pass

    def _log_draw_summary(self, rng: SeededRng, n: int):
        self.logger.debug(
            f"{self.label.upper()}: drew {n} states from shard {rng.shard} of seed {rng.seed}"
        )
