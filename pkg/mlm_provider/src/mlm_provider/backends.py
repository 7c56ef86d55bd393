"""Masked-LM scoring backends.

A backend scores every vocabulary token for one masked position and is
fully deterministic: the same (tokens, position) pair always produces
the same distribution.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np


class Backend(Protocol):
    vocab_size: int

    @property
    def ready(self) -> bool: ...

    def logprobs(self, tokens: Sequence[int], position: int) -> np.ndarray:
        """Log-probabilities over the whole vocabulary for the masked position."""
        ...

    def token_text(self, token_id: int) -> str: ...


class SyntheticBackend:
    """Deterministic pseudo-model for tests and offline runs.

    The distribution for a masked position is derived by hashing the
    context (the token sequence with the position masked out), so repeated
    requests are identical and different contexts get different rankings.
    No model weights are loaded; the backend is ready immediately unless
    constructed with ready=False (to exercise health gating).
    """

    def __init__(self, vocab_size: int = 1000, ready: bool = True):
        if vocab_size < 2:
            raise ValueError("vocab_size must be >= 2")
        self.vocab_size = vocab_size
        self._ready = ready

    @property
    def ready(self) -> bool:
        return self._ready

    def set_ready(self, value: bool) -> None:
        self._ready = value

    def logprobs(self, tokens: Sequence[int], position: int) -> np.ndarray:
        context = list(int(t) for t in tokens)
        context[position] = -1  # the mask; the original must not leak in
        digest = hashlib.sha256(
            (",".join(map(str, context)) + f"|{position}").encode()
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        scores = rng.standard_normal(self.vocab_size)
        # log-softmax
        scores -= scores.max()
        return scores - np.log(np.exp(scores).sum())

    def token_text(self, token_id: int) -> str:
        return f"tok{token_id}"


class TransformersFillMaskBackend:
    """Real fill-mask model via transformers (optional heavyweight path).

    Loads lazily; `ready` turns true once the model finished loading.
    """

    def __init__(self, model_name: str = "roberta-base"):
        self.model_name = model_name
        self._model = None
        self._tokenizer = None

    @property
    def ready(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._tokenizer = AutoTokenizer.from_pretrained(self.model_name)
        self._model = AutoModelForMaskedLM.from_pretrained(self.model_name)
        self._model.eval()
        self.vocab_size = self._tokenizer.vocab_size

    def logprobs(self, tokens: Sequence[int], position: int) -> np.ndarray:
        import torch

        ids = list(int(t) for t in tokens)
        ids[position] = self._tokenizer.mask_token_id
        with torch.no_grad():
            logits = self._model(torch.tensor([ids])).logits[0, position]
        return torch.log_softmax(logits, dim=-1).numpy()

    def token_text(self, token_id: int) -> str:
        return self._tokenizer.decode([token_id])
