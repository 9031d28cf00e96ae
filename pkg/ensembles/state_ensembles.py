"""
Concrete state ensembles: random mixed, Haar pure and separable mixtures
"""
from typing import Dict, Type

import numpy as np

from ensembles.base_ensemble import BaseEnsemble
from entanglement.errors import ConfigInvalid, InvalidCount
from entanglement.qstate import projectors_batch
from entanglement.rng import SeededRng
from entanglement.sampling import (
    DEFAULT_SEPARABLE_TERMS,
    haar_pure_batch,
    random_mixed_batch,
    random_separable_batch,
)


class MixedEnsemble(BaseEnsemble):
    """Haar unitary x uniform-simplex spectrum"""

    def __init__(self):
        super().__init__('mixed')

    def draw(self, rng: SeededRng, n: int) -> np.ndarray:
        states = random_mixed_batch(rng, n)
        self._log_draw_summary(rng, n)
        return states


class PureHaarEnsemble(BaseEnsemble):
    """Projectors onto Haar-random pure states"""

    def __init__(self):
        super().__init__('pure-haar')

    def draw(self, rng: SeededRng, n: int) -> np.ndarray:
        states = projectors_batch(haar_pure_batch(rng, n))
        self._log_draw_summary(rng, n)
        return states


class SeparableEnsemble(BaseEnsemble):
    """Mixtures of k random product states"""

    def __init__(self, terms: int = DEFAULT_SEPARABLE_TERMS):
        super().__init__('separable')
        if terms < 1:
            raise InvalidCount(f"Separable mixtures need at least one term, got {terms}")
        self.terms = terms

    @property
    def label(self) -> str:
        return f"separable({self.terms})"

    def draw(self, rng: SeededRng, n: int) -> np.ndarray:
        states = random_separable_batch(rng, n, self.terms)
        self._log_draw_summary(rng, n)
        return states


ENSEMBLE_CLASSES: Dict[str, Type[BaseEnsemble]] = {
    'mixed': MixedEnsemble,
    'pure-haar': PureHaarEnsemble,
    'separable': SeparableEnsemble,
}


def build_ensemble(name: str, separable_terms: int = DEFAULT_SEPARABLE_TERMS) -> BaseEnsemble:
    """
    Instantiate an ensemble by name

    Raises:
        ConfigInvalid: for unknown names or an invalid term count
    """
    if name not in ENSEMBLE_CLASSES:
        raise ConfigInvalid(f"Unknown ensemble: {name}")
    if name == 'separable':
        try:
            return SeparableEnsemble(separable_terms)
        except InvalidCount as e:
            raise ConfigInvalid(str(e)) from e
    return ENSEMBLE_CLASSES[name]()
