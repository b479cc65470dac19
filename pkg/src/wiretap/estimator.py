"""Transformer-style wrapper around the seeded wiretap scheme.

>>> coder = WiretapCoder(code="hamming_7_4", message_length=2, random_state=0).fit()
>>> x = coder.transform([[1, 0], [0, 1]])
>>> coder.inverse_transform(x).tolist()
[[1, 0], [0, 1]]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int, check_symbols
from .coremath import from_symbols, to_symbols
from .ecc import LinearCode, standard_code
from .extractors import make_extractor

__all__ = ["WiretapCoder"]


class WiretapCoder(TransformerMixin, BaseEstimator):
    """Encode message rows into channel words and decode them back.

    ``transform`` maps rows of ``message_length`` symbols to codewords of the
    code's length, drawing fresh inverter randomness per row;
    ``inverse_transform`` decodes received words and applies the extractor.

    Parameters
    ----------
    code : str or LinearCode
        A standard code name or an explicit code.
    message_length : int
        Message symbols per block; at most the code dimension.
    extractor : {"toeplitz", "finite_field"}
    seed : int or None
        Public extractor seed.  ``None`` draws one during ``fit``.
    random_state : int, Generator or None
    """

    def __init__(self, code="hamming_7_4", message_length=1, extractor="toeplitz", seed=None, random_state=None):
        self.code = code
        self.message_length = message_length
        self.extractor = extractor
        self.seed = seed
        self.random_state = random_state

    def _resolve_code(self) -> LinearCode:
        if isinstance(self.code, LinearCode):
            return self.code
        if isinstance(self.code, str):
            return standard_code(self.code)
        raise TypeError("code must be a LinearCode or a standard code name")

    def fit(self, X=None, y=None):
        code = self._resolve_code()
        lam = check_positive_int(self.message_length, "message_length")
        if lam > code.k:
            raise ValueError(f"message_length {lam} exceeds the code dimension {code.k}")
        ext = make_extractor(self.extractor, code.k, lam, code.p)
        seeds = ext.seeds()
        self._rng = np.random.default_rng(check_random_state(self.random_state).randint(2**31))
        if self.seed is None:
            seed = int(seeds[self._rng.integers(seeds.size)])
        else:
            seed = int(self.seed)
            if seed not in set(seeds.tolist()):
                raise ValueError(f"seed {seed} is not valid for the {ext.family} extractor")
        self.code_, self.extractor_, self.seed_ = code, ext, seed
        self.n_features_in_ = lam
        return self

    def transform(self, X):
        check_is_fitted(self, "extractor_")
        ext, code = self.extractor_, self.code_
        msgs = from_symbols(check_symbols(X, ext.lam, ext.p), ext.p)
        r = self._rng.integers(ext.n_random, size=msgs.shape[0])
        v = np.asarray(ext.invert(msgs, self.seed_, r))
        return code.encode_index(v)

    def inverse_transform(self, Y):
        check_is_fitted(self, "extractor_")
        ext, code = self.extractor_, self.code_
        words = check_symbols(Y, code.n, code.p, "Y")
        v = np.atleast_1d(code.decode_index(words))
        m = np.asarray(ext.extract(v, self.seed_))
        return to_symbols(m, ext.lam, ext.p)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "code_")
        return np.array([f"x{i}" for i in range(self.code_.n)], dtype=object)
