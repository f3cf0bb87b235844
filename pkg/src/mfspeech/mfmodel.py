"""Multi-frame signal model: frame stacking, speech IFC vector and PSD, covariance composition.

A stacked vector for output time ``t`` is ordered newest first,
``[X(t+l), X(t+l-1), ..., X(t+l-N+1)]``; covariances follow
``Phi[i, j] = E[x_i conj(x_j)]``.
"""

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BinCountMismatch, ConfigInvalid, OrderMismatch, ZeroSpeechPsd
from .linalg import MAX_ORDER, hermitize

SPEECH_PSD_FLOOR = 1e-30


@dataclass(frozen=True)
class MfBufferConfig:
    """Filter order, look-ahead and the stacked position of the target frame.

    ``selection_index=None`` selects the tap holding ``X(t)``, i.e. the
    look-ahead index clipped to ``order - 1``.
    """

    order: int = 5
    lookahead: int = 2
    selection_index: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise ConfigInvalid(f"order must be in [1, {MAX_ORDER}]")
        if self.lookahead < 0:
            raise ConfigInvalid("lookahead must be >= 0")
        if self.selection_index is not None and not 0 <= self.selection_index < self.order:
            raise ConfigInvalid("selection_index must lie in [0, order)")

    @property
    def selection(self):
        if self.selection_index is None:
            return min(self.lookahead, self.order - 1)
        return self.selection_index


class FrameBuffer:
    """Streaming stacker for one stream; history is zero-padded.

    ``push_frame`` returns ``None`` until ``lookahead`` frames beyond time 0
    have arrived, then one ``(bins, order)`` stack per pushed frame.
    """

    def __init__(self, config, num_bins):
        self.config = config
        self.num_bins = num_bins
        self._history = deque(
            [np.zeros(num_bins, dtype=np.complex128) for _ in range(config.order)], maxlen=config.order
        )
        self._pushed = 0

    def push_frame(self, frame):
        frame = np.asarray(frame, dtype=np.complex128)
        if frame.shape != (self.num_bins,):
            raise BinCountMismatch(f"expected {self.num_bins} bins, got {frame.shape}")
        self._history.appendleft(frame)
        self._pushed += 1
        if self._pushed <= self.config.lookahead:
            return None
        return np.stack(self._history, axis=1)

    @property
    def emitted_time(self):
        """Output time ``t`` of the most recent stack (``pushed - 1 - lookahead``)."""
        return self._pushed - 1 - self.config.lookahead


def stack_frames(frames, order):
    """Stack a whole spectrogram at once: ``out[k, f, i] = frames[k - i, f]`` (zeros before 0).

    Row ``k`` is the stack available when frame ``k`` is the newest one.
    """
    frames = np.asarray(frames, dtype=np.complex128)
    n_frames, n_bins = frames.shape
    out = np.zeros((n_frames, n_bins, order), dtype=np.complex128)
    for i in range(order):
        out[i:, :, i] = frames[: n_frames - i] if i < n_frames else 0.0
    return out


def speech_psd(phi_ss, selection_index=0):
    """Selected diagonal entry of the speech covariance, clamped at zero."""
    phi_ss = np.asarray(phi_ss)
    return np.maximum(phi_ss[..., selection_index, selection_index].real, 0.0)


def ifc_from_cov(phi_ss, selection_index=0):
    """Speech inter-frame correlation vector: selected column over selected diagonal entry.

    The entry at ``selection_index`` is set to exactly 1.

    Raises:
        ZeroSpeechPsd: the speech PSD is below ``1e-30``.
    """
    phi_ss = np.asarray(phi_ss, dtype=np.complex128)
    if phi_ss.ndim != 2 or phi_ss.shape[0] != phi_ss.shape[1]:
        raise OrderMismatch("phi_ss must be a square matrix")
    psd = phi_ss[selection_index, selection_index].real
    if not psd > SPEECH_PSD_FLOOR:
        raise ZeroSpeechPsd(f"speech PSD {psd!r} below floor")
    gamma = phi_ss[:, selection_index] / psd
    gamma[selection_index] = 1.0
    return gamma


def ifc_batch(phi_ss, selection_index=0):
    """Batched IFC vectors; speech-absent entries fall back to the selection vector.

    Returns ``(gamma, phi_s, present)``.
    """
    phi_ss = np.asarray(phi_ss, dtype=np.complex128)
    psd = phi_ss[:, selection_index, selection_index].real
    present = psd > SPEECH_PSD_FLOOR
    safe = np.where(present, psd, 1.0)
    gamma = phi_ss[:, :, selection_index] / safe[:, None]
    gamma[~present] = 0.0
    gamma[:, selection_index] = 1.0
    return gamma, np.where(present, psd, 0.0), present


def compose_phixx(phi_s, gamma, phi_uu):
    """Noisy covariance from the rank-1 correlated speech term plus the undesired covariance."""
    if np.any(np.asarray(phi_s) < 0):
        raise ValueError("phi_s must be non-negative")
    gamma = np.asarray(gamma, dtype=np.complex128)
    phi_s = np.asarray(phi_s, dtype=np.float64)
    rank1 = phi_s[..., None, None] * gamma[..., :, None] * np.conj(gamma[..., None, :])
    return hermitize(rank1 + np.asarray(phi_uu, dtype=np.complex128))
