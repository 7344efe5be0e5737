"""SC, SCAN, PC-SCAN and CSR-SCAN decoders over the shared polar tree.

All message passing runs in min-sum LLR arithmetic with a genuine IEEE
+inf for known-zero feedback: f(+inf, x) = x exactly, which is what makes
the incremental register form of the PC kernel bitwise-equal to the batch
form. Channel LLRs are expected finite (saturated at the channel
interface for noiseless frames); beta messages are finite or +inf, so no
inf - inf can arise anywhere in the tree.

Decoders accept a single frame of shape (N,) or a batch (B, N); every
array in the result mirrors the input's batch shape. A decoder instance
owns its buffers and is single-threaded; independent instances may run
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .construction import FROZEN, PC, CodeSpec, PcStructure, RoleMap

# Leaf kernel classes of the parity-check tanner layer.
LEAF_FROZEN = 0
LEAF_PC = 1
LEAF_CHECKED = 2
LEAF_UNCHECKED = 3

SCHEDULES = ("sequential", "literal")


def f_op(*values: float) -> float:
    """Min-sum box-plus: sign product (zero counts positive), min magnitude.

    Associative and commutative with identity +inf; f(+inf, x) = x.
    """
    if not values:
        raise ValueError("f_op needs at least one argument")
    sign = 1.0
    mag = np.inf
    for v in values:
        if v < 0:
            sign = -sign
        mag = min(mag, abs(v))
    return sign * mag


def f_pair(a, b):
    """Elementwise two-input f over arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m = np.minimum(np.abs(a), np.abs(b))
    return np.where((a < 0) != (b < 0), -m, m)


def f_reduce(cols: np.ndarray) -> np.ndarray:
    """f folded along the last axis (batch rows reduce independently)."""
    neg = (cols < 0).sum(axis=-1) & 1
    mag = np.abs(cols).min(axis=-1)
    return np.where(neg.astype(bool), -mag, mag)


def _split(v):
    v = np.asarray(v, dtype=np.float64)
    m = v.shape[-1]
    if m < 2 or m % 2:
        raise ValueError(f"parent vector must have even length >= 2, got {m}")
    return v[..., : m // 2], v[..., m // 2 :]


def alpha_step(alpha_v, beta_l, beta_r):
    """Parent-to-children message update (both halves).

    alpha_l = f(alpha_lo, beta_r + alpha_hi);
    alpha_r = f(alpha_lo, beta_l) + alpha_hi.
    With the sequential schedule the right half is only valid once beta_l
    is the left subtree's fresh feedback.
    """
    a_lo, a_hi = _split(alpha_v)
    beta_l = np.asarray(beta_l, dtype=np.float64)
    beta_r = np.asarray(beta_r, dtype=np.float64)
    if beta_l.shape[-1] != a_lo.shape[-1] or beta_r.shape[-1] != a_lo.shape[-1]:
        raise ValueError("child beta length must be half the parent alpha length")
    return f_pair(a_lo, beta_r + a_hi), f_pair(a_lo, beta_l) + a_hi


def beta_step(beta_l, beta_r, alpha_v):
    """Children-to-parent feedback:
    beta_v_lo = f(beta_l, alpha_hi + beta_r); beta_v_hi = f(beta_l, alpha_lo) + beta_r.
    """
    a_lo, a_hi = _split(alpha_v)
    beta_l = np.asarray(beta_l, dtype=np.float64)
    beta_r = np.asarray(beta_r, dtype=np.float64)
    if beta_l.shape[-1] != a_lo.shape[-1] or beta_r.shape[-1] != a_lo.shape[-1]:
        raise ValueError("child beta length must be half the parent alpha length")
    return np.concatenate(
        [f_pair(beta_l, a_hi + beta_r), f_pair(beta_l, a_lo) + beta_r], axis=-1
    )


def hard_output(leaf_posteriors, rolemap: RoleMap) -> np.ndarray:
    """Hard decisions at the info positions: 1 iff posterior < 0, ties to 0."""
    post = np.asarray(leaf_posteriors, dtype=np.float64)
    return (post[..., rolemap.info_positions] < 0).astype(np.uint8)


@dataclass(frozen=True)
class DampingConfig:
    """Per-iteration damping schedules; the last entry repeats beyond its end."""

    lambda_p: tuple[float, ...] = (1.0,)
    lambda_i: tuple[float, ...] = (0.67,)

    def __post_init__(self):
        if not self.lambda_p or not self.lambda_i:
            raise ValueError("damping schedules must be non-empty")
        if min(self.lambda_p) < 0 or min(self.lambda_i) < 0:
            raise ValueError("damping factors must be non-negative")

    def lambda_p_at(self, t: int) -> float:
        return self.lambda_p[min(t, len(self.lambda_p) - 1)]

    def lambda_i_at(self, t: int) -> float:
        return self.lambda_i[min(t, len(self.lambda_i) - 1)]


@dataclass
class DecodeResult:
    """Decoder output: hard info bits plus the soft leaf/coded LLRs.

    iteration_info_bits holds the hard decisions snapshot after each
    iteration (a single snapshot for SC), so one decode pass yields the
    per-iteration statistics of a simulation cell.
    """

    info_bits: np.ndarray
    leaf_posteriors: np.ndarray
    coded_extrinsics: np.ndarray
    coded_posteriors: np.ndarray
    iterations_run: int
    iteration_info_bits: tuple[np.ndarray, ...] = ()


def classify_leaves(rolemap: RoleMap, pcs: PcStructure) -> np.ndarray:
    """Four-way leaf kernel classes; PC bits with empty I(u) count as frozen."""
    kind = np.full(rolemap.N, LEAF_FROZEN, dtype=np.int8)
    kind[rolemap.info_positions] = LEAF_UNCHECKED
    if pcs.checked_info:
        kind[np.array(pcs.checked_info)] = LEAF_CHECKED
    for u, iu in pcs.checked_sets.items():
        kind[u] = LEAF_PC if iu else LEAF_FROZEN
    return kind


def _as_llr_batch(llrs, N: int) -> tuple[np.ndarray, bool]:
    a = np.asarray(llrs, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
        single = True
    elif a.ndim == 2:
        single = False
    else:
        raise ValueError(f"expected an LLR vector or batch, got shape {a.shape}")
    if a.shape[1] != N:
        raise ValueError(f"LLR length {a.shape[1]} != N {N}")
    return a, single


class _ScanFamilyDecoder:
    """Shared alpha/beta traversal of the binary decoding tree.

    The sequential schedule recomputes the right child's alpha after the
    left subtree has refreshed its beta; the literal schedule computes
    both child alphas on node entry from the pre-visit betas.
    """

    def __init__(self, rolemap: RoleMap, schedule: str = "sequential"):
        if schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {schedule!r}")
        self.rolemap = rolemap
        self.schedule = schedule
        self.N = rolemap.N
        self.n = self.N.bit_length() - 1
        self._info_pos = rolemap.info_positions

    # subclass hooks
    def _begin_iteration(self, t: int) -> None:
        pass

    def _leaf_visit(self, u: int, t: int) -> None:
        raise NotImplementedError

    def decode(self, llrs, t_max: int = 1) -> DecodeResult:
        if t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {t_max}")
        root, single = _as_llr_batch(llrs, self.N)
        B = root.shape[0]
        self._alpha = [np.zeros((B, self.N)) for _ in range(self.n + 1)]
        self._beta = [np.zeros((B, self.N)) for _ in range(self.n + 1)]
        self._alpha[self.n][:] = root
        self._cache = np.zeros((B, self.N))
        snapshots = []
        for t in range(t_max):
            self._begin_iteration(t)
            self._traverse(self.n, 0, t)
            snapshots.append(self._hard_info())
        leaf_post = self._alpha[0] + self._beta[0]
        extr = self._beta[self.n].copy()
        result = DecodeResult(
            info_bits=snapshots[-1],
            leaf_posteriors=leaf_post,
            coded_extrinsics=extr,
            coded_posteriors=root + extr,
            iterations_run=t_max,
            iteration_info_bits=tuple(snapshots),
        )
        if single:
            result.info_bits = result.info_bits[0]
            result.leaf_posteriors = result.leaf_posteriors[0]
            result.coded_extrinsics = result.coded_extrinsics[0]
            result.coded_posteriors = result.coded_posteriors[0]
            result.iteration_info_bits = tuple(s[0] for s in snapshots)
        return result

    def _hard_info(self) -> np.ndarray:
        post = self._alpha[0][:, self._info_pos] + self._beta[0][:, self._info_pos]
        return (post < 0).astype(np.uint8)

    def _traverse(self, s: int, base: int, t: int) -> None:
        if s == 0:
            self._cache[:, base] = self._alpha[0][:, base]
            self._leaf_visit(base, t)
            return
        half = 1 << (s - 1)
        lo = slice(base, base + half)
        hi = slice(base + half, base + 2 * half)
        a_lo = self._alpha[s][:, lo]
        a_hi = self._alpha[s][:, hi]
        asub = self._alpha[s - 1]
        bsub = self._beta[s - 1]
        if self.schedule == "sequential":
            asub[:, lo] = f_pair(a_lo, bsub[:, hi] + a_hi)
            self._traverse(s - 1, base, t)
            asub[:, hi] = f_pair(a_lo, bsub[:, lo]) + a_hi
            self._traverse(s - 1, base + half, t)
        else:
            asub[:, lo] = f_pair(a_lo, bsub[:, hi] + a_hi)
            asub[:, hi] = f_pair(a_lo, bsub[:, lo]) + a_hi
            self._traverse(s - 1, base, t)
            self._traverse(s - 1, base + half, t)
        b_lo = bsub[:, lo]
        b_hi = bsub[:, hi]
        self._beta[s][:, lo] = f_pair(b_lo, a_hi + b_hi)
        self._beta[s][:, hi] = f_pair(b_lo, a_lo) + b_hi


class ScanDecoder(_ScanFamilyDecoder):
    """Plain soft cancellation for codes without PC bits.

    Leaf feedback is fixed: +inf at frozen leaves, 0 at info leaves.
    """

    def __init__(self, rolemap: RoleMap, schedule: str = "sequential"):
        super().__init__(rolemap, schedule)
        if np.any(rolemap.role == PC):
            raise ValueError("code has PC bits; use the PC-SCAN decoder")
        self._frozen = rolemap.role == FROZEN

    def _leaf_visit(self, u: int, t: int) -> None:
        self._beta[0][:, u] = np.inf if self._frozen[u] else 0.0


class PcScanDecoder(_ScanFamilyDecoder):
    """PC-SCAN: soft cancellation with tanner-layer parity leaf kernels.

    A PC leaf feeds back lambda_p * f over the cached alphas of its
    checked set; a checked info leaf sums lambda_i * f over each checking
    PC bit's alpha and the co-checked alphas. Cached alphas of leaves not
    yet visited in the current iteration are previous-iteration values
    (zero in iteration 1).
    """

    def __init__(
        self,
        rolemap: RoleMap,
        pcs: PcStructure,
        damping: DampingConfig | None = None,
        schedule: str = "sequential",
    ):
        super().__init__(rolemap, schedule)
        self.damping = damping if damping is not None else DampingConfig()
        self._kind = classify_leaves(rolemap, pcs)
        self._pc_cols = {
            u: np.array(iu, dtype=int) for u, iu in pcs.checked_sets.items() if iu
        }
        self._contribs: dict[int, list[np.ndarray]] = {}
        for u in pcs.checked_info:
            cols = []
            for up in pcs.checking_sets[u]:
                others = [j for j in pcs.checked_sets[up] if j != u]
                cols.append(np.array([up] + others, dtype=int))
            self._contribs[u] = cols

    def _begin_iteration(self, t: int) -> None:
        self._lam_p = self.damping.lambda_p_at(t)
        self._lam_i = self.damping.lambda_i_at(t)

    def _leaf_visit(self, u: int, t: int) -> None:
        k = self._kind[u]
        out = self._beta[0]
        if k == LEAF_FROZEN:
            out[:, u] = np.inf
        elif k == LEAF_UNCHECKED:
            out[:, u] = 0.0
        elif k == LEAF_PC:
            out[:, u] = self._lam_p * f_reduce(self._cache[:, self._pc_cols[u]])
        else:
            acc = np.zeros(self._cache.shape[0])
            for cols in self._contribs[u]:
                acc += self._lam_i * f_reduce(self._cache[:, cols])
            out[:, u] = acc


class CsrScanDecoder(_ScanFamilyDecoder):
    """CSR-SCAN: PC feedback read from L cyclic registers, zero info feedback.

    Each register accumulates f(delta, alpha) over the information leaves
    of its chain in visit order; a PC leaf reads its chain's register.
    Registers reset to the f identity (+inf) at every iteration start, so
    a PC leaf with no preceding info bits feeds back +inf exactly as the
    general kernel's empty-set branch does.
    """

    def __init__(self, rolemap: RoleMap, pcs: PcStructure, schedule: str = "sequential"):
        super().__init__(rolemap, schedule)
        self.L = pcs.L
        self._role = rolemap.role
        self._delta: np.ndarray | None = None

    def _begin_iteration(self, t: int) -> None:
        B = self._alpha[0].shape[0]
        if self._delta is None or self._delta.shape[0] != B:
            self._delta = np.empty((B, self.L))
        self._delta[:] = np.inf

    def _leaf_visit(self, u: int, t: int) -> None:
        r = u % self.L
        role = self._role[u]
        if role == FROZEN:
            self._beta[0][:, u] = np.inf
        elif role == PC:
            self._beta[0][:, u] = self._delta[:, r]
        else:
            self._delta[:, r] = f_pair(self._delta[:, r], self._alpha[0][:, u])
            self._beta[0][:, u] = 0.0


class ScDecoder:
    """Min-sum successive cancellation with hard PC constraint tracking.

    Frozen leaves decide 0, PC leaves replay the encoder's register
    parity over the already-decided info bits, info leaves take the sign
    decision. Soft outputs are the hard-decision-equivalent +-inf
    posteriors; coded extrinsics are all-zero.
    """

    def __init__(self, rolemap: RoleMap, pcs: PcStructure):
        self.rolemap = rolemap
        self.L = pcs.L
        self.N = rolemap.N
        self._role = rolemap.role
        self._info_pos = rolemap.info_positions

    def decode(self, llrs) -> DecodeResult:
        root, single = _as_llr_batch(llrs, self.N)
        B = root.shape[0]
        u_hat = np.zeros((B, self.N), dtype=np.uint8)
        sigma = np.zeros((B, self.L), dtype=np.uint8)

        def rec(alpha: np.ndarray, base: int) -> np.ndarray:
            m = alpha.shape[1]
            if m == 1:
                role = self._role[base]
                if role == FROZEN:
                    bits = np.zeros(B, dtype=np.uint8)
                elif role == PC:
                    bits = sigma[:, base % self.L].copy()
                else:
                    bits = (alpha[:, 0] < 0).astype(np.uint8)
                    sigma[:, base % self.L] ^= bits
                u_hat[:, base] = bits
                return bits[:, None]
            half = m // 2
            a_lo, a_hi = alpha[:, :half], alpha[:, half:]
            x_l = rec(f_pair(a_lo, a_hi), base)
            x_r = rec(a_hi + (1.0 - 2.0 * x_l) * a_lo, base + half)
            return np.concatenate([x_l ^ x_r, x_r], axis=1)

        rec(root, 0)
        info_bits = u_hat[:, self._info_pos]
        leaf_post = np.where(u_hat == 0, np.inf, -np.inf)
        result = DecodeResult(
            info_bits=info_bits,
            leaf_posteriors=leaf_post,
            coded_extrinsics=np.zeros((B, self.N)),
            coded_posteriors=root.copy(),
            iterations_run=1,
            iteration_info_bits=(info_bits,),
        )
        if single:
            result.info_bits = result.info_bits[0]
            result.leaf_posteriors = result.leaf_posteriors[0]
            result.coded_extrinsics = result.coded_extrinsics[0]
            result.coded_posteriors = result.coded_posteriors[0]
            result.iteration_info_bits = (result.info_bits,)
        return result


def sc_decode(llrs, spec: CodeSpec, rolemap: RoleMap, pcs: PcStructure) -> DecodeResult:
    return ScDecoder(rolemap, pcs).decode(llrs)


def scan_decode(
    llrs, spec: CodeSpec, rolemap: RoleMap, t_max: int = 1, schedule: str = "sequential"
) -> DecodeResult:
    return ScanDecoder(rolemap, schedule).decode(llrs, t_max)


def pc_scan_decode(
    llrs,
    spec: CodeSpec,
    rolemap: RoleMap,
    pcs: PcStructure,
    damping: DampingConfig | None = None,
    t_max: int = 1,
    schedule: str = "sequential",
) -> DecodeResult:
    return PcScanDecoder(rolemap, pcs, damping, schedule).decode(llrs, t_max)


def csr_scan_decode(
    llrs,
    spec: CodeSpec,
    rolemap: RoleMap,
    pcs: PcStructure,
    t_max: int = 1,
    schedule: str = "sequential",
) -> DecodeResult:
    return CsrScanDecoder(rolemap, pcs, schedule).decode(llrs, t_max)
