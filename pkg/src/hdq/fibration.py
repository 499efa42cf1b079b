"""The equivariant submersion onto a lower-rank Siegel domain.

Dropping the last fundamental root splits the algebra into a j-invariant
subalgebra (everything the last root does not touch) and a complementary
j-invariant ideal that is structurally the rank-one algebra of a unit
ball: rank one, with a Heisenberg derived algebra whose center is the last
full-root line and a nondegenerate symplectic bracket on its half block.
The omega-orthogonal projection onto the subalgebra is an algebra
homomorphism; complexified on the (-1)-block it realizes the equivariant
submersion between the two Siegel domains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    HeisenbergCheckFailed,
    ImageOutsideDomain,
    NotInDomain,
    RootPatternViolation,
)
from .jalgebra import NormalJAlgebra, fine_structure, gram, subalgebra
from .lie_core import Subspace, bracket, derived_algebra, span, residual_outside
from .siegel import (
    DomainPoint,
    GroupElement,
    SiegelModel,
    _aligned_basis,
    act,
    build_model,
    contains,
    group_element,
    random_element,
)


@dataclass(frozen=True, eq=False)
class FibrationStep:
    b_ideal: Subspace
    b_basis: np.ndarray
    b_jalgebra: NormalJAlgebra
    s_prime: NormalJAlgebra
    s_prime_basis: np.ndarray
    proj: np.ndarray
    domain_model: SiegelModel
    quotient_model: SiegelModel
    fiber_model: SiegelModel
    fiber_dim: int
    residuals: dict


def split_last_root(J: NormalJAlgebra, model: SiegelModel | None = None) -> FibrationStep:
    """Split off the last fundamental root; see the module docstring."""
    fine = fine_structure(J)
    r = fine.rank
    if r < 1:
        raise RootPatternViolation("need rank at least one to split")
    if model is None:
        model = build_model(J)
    n = J.dim

    def spaces(kind, member):
        return [rt.space for rt in fine.roots if rt.label[0] == kind and member(rt.label)]

    # subalgebra: every root not involving the last fundamental root
    prime_cols = [fine.xi[k] for k in range(r - 1)]
    for sp in spaces("sum", lambda l: l[2] < r - 1):
        prime_cols.extend(_aligned(sp).T)
    for sp in spaces("half", lambda l: l[1] < r - 1):
        prime_cols.extend(_aligned(sp).T)
    prime_cols += [fine.eta[k] for k in range(r - 1)]
    for sp in spaces("diff", lambda l: l[1] < r - 1):
        prime_cols.extend(_aligned(sp).T)

    # ideal: everything the last root touches
    b_cols = [fine.xi[r - 1]]
    for sp in spaces("sum", lambda l: l[2] == r - 1):
        b_cols.extend(_aligned(sp).T)
    for sp in spaces("half", lambda l: l[1] == r - 1):
        b_cols.extend(_aligned(sp).T)
    b_cols.append(fine.eta[r - 1])
    for sp in spaces("diff", lambda l: l[1] == r - 1):
        b_cols.extend(_aligned(sp).T)

    B_prime = np.column_stack(prime_cols) if prime_cols else np.zeros((n, 0))
    B_ideal = np.column_stack(b_cols)
    if B_prime.shape[1] + B_ideal.shape[1] != n:
        raise RootPatternViolation("root split does not fill the algebra")
    if B_ideal.shape[1] % 2:
        raise HeisenbergCheckFailed("ideal has odd dimension")
    m = B_ideal.shape[1] // 2

    G = gram(J)
    residuals = {}
    if B_prime.shape[1]:
        cross = B_prime.T @ G @ B_ideal
        residuals["orthogonality"] = float(np.max(np.abs(cross)))
        proj = B_prime @ np.linalg.solve(B_prime.T @ G @ B_prime, B_prime.T @ G)
    else:
        residuals["orthogonality"] = 0.0
        proj = np.zeros((n, n))

    s_prime = subalgebra(J, B_prime)
    b_jalg = subalgebra(J, B_ideal)

    residuals["proj_j_commutes"] = float(np.max(np.abs(proj @ J.j - J.j @ proj)))
    residuals["proj_homomorphism"] = _homomorphism_defect(J, proj)
    residuals.update(_ball_structure_checks(J, b_jalg, B_ideal, m))

    quotient_model = build_model(s_prime)
    fiber_model = build_model(b_jalg)

    return FibrationStep(
        b_ideal=Subspace(n, B_ideal),
        b_basis=B_ideal,
        b_jalgebra=b_jalg,
        s_prime=s_prime,
        s_prime_basis=B_prime,
        proj=proj,
        domain_model=model,
        quotient_model=quotient_model,
        fiber_model=fiber_model,
        fiber_dim=m,
        residuals=residuals,
    )


def _aligned(V: Subspace) -> np.ndarray:
    return _aligned_basis(V)


def _homomorphism_defect(J: NormalJAlgebra, proj: np.ndarray) -> float:
    n = J.dim
    worst = 0.0
    eye = np.eye(n)
    for a in range(n):
        for b in range(a + 1, n):
            lhs = proj @ bracket(eye[a], eye[b], J.L)
            rhs = bracket(proj @ eye[a], proj @ eye[b], J.L)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _ball_structure_checks(J, b_jalg, B_ideal, m) -> dict:
    """Rank one + Heisenberg derived algebra + symplectic half block."""
    out = {}
    fine_b = fine_structure(b_jalg)
    if fine_b.rank != 1:
        raise HeisenbergCheckFailed(f"ideal has rank {fine_b.rank}, expected 1")
    der = derived_algebra(b_jalg.L)
    if der.dim != 2 * m - 1:
        raise HeisenbergCheckFailed(
            f"derived algebra of the ideal has dim {der.dim}, expected {2 * m - 1}"
        )
    # center of the derived algebra must be the full-root line xi_1
    xi_line = span([fine_b.xi[0]], b_jalg.dim)
    center_defect = 0.0
    for i in range(der.dim):
        v = der.basis_matrix[:, i]
        br = bracket(fine_b.xi[0], v, b_jalg.L)
        center_defect = max(center_defect, float(np.max(np.abs(br))))
    out["center"] = center_defect
    # second derived must land in the center line
    sec = 0.0
    for i in range(der.dim):
        for jx in range(i + 1, der.dim):
            v = bracket(der.basis_matrix[:, i], der.basis_matrix[:, jx], b_jalg.L)
            sec = max(sec, residual_outside(v, xi_line))
    out["heisenberg"] = sec
    # nondegenerate symplectic pairing on the half block
    half = fine_b.s_minushalf
    if half.dim:
        xi_vec = fine_b.xi[0]
        scale = float(xi_vec @ xi_vec)
        P = np.zeros((half.dim, half.dim))
        for i in range(half.dim):
            for jx in range(half.dim):
                v = bracket(half.basis_matrix[:, i], half.basis_matrix[:, jx], b_jalg.L)
                P[i, jx] = float(v @ xi_vec) / scale
        det = abs(np.linalg.det(P))
        if det < 1e-10:
            raise HeisenbergCheckFailed(f"symplectic pairing is degenerate (|det| {det:.2e})")
        out["symplectic_det"] = det
    else:
        out["symplectic_det"] = 1.0
    return out


# ---------------------------------------------------------------------------
# the submersion on points and group elements
# ---------------------------------------------------------------------------

def project_point(point: DomainPoint, F: FibrationStep, check: bool = True) -> DomainPoint:
    """Apply the complexified projection; the image must stay in the target."""
    M, Mq = F.domain_model, F.quotient_model
    if check and not contains(point, M, 1e-7):
        raise NotInDomain("point to project is outside the domain")
    if F.s_prime.dim == 0:
        return Mq.base_point() if Mq.p else DomainPoint(np.zeros(0, complex), np.zeros(0))
    pinv = np.linalg.pinv(F.s_prime_basis)
    # z-block
    z_amb = M.C[:, : M.p] @ point.z
    z_sub = pinv @ (F.proj @ z_amb)
    z_q = (Mq.Cinv @ z_sub)[: Mq.p]
    # w-block
    if M.q:
        w_amb = M.C[:, M.p : M.p + M.q] @ point.w
        w_sub = pinv @ (F.proj @ w_amb)
        w_q = (Mq.Cinv @ w_sub)[Mq.p : Mq.p + Mq.q]
    else:
        w_q = np.zeros(Mq.q)
    out = DomainPoint(z_q, w_q)
    if check and not contains(out, Mq, 1e-7):
        raise ImageOutsideDomain("projected point left the quotient domain")
    return out


def push_group(g: GroupElement, F: FibrationStep) -> GroupElement:
    """Push exponential coordinates through the quotient homomorphism."""
    M, Mq = F.domain_model, F.quotient_model
    if F.s_prime.dim == 0:
        return group_element(Mq, np.zeros(0), np.zeros(0))
    pinv = np.linalg.pinv(F.s_prime_basis)
    minus_amb = M.C[:, : M.p + M.q] @ g.x_minus
    zero_amb = M.C[:, M.p + M.q :] @ g.x_zero
    minus_q = Mq.Cinv @ (pinv @ (F.proj @ minus_amb))
    zero_q = Mq.Cinv @ (pinv @ (F.proj @ zero_amb))
    return group_element(Mq, minus_q[: Mq.p + Mq.q], zero_q[Mq.p + Mq.q :])


def check_equivariance(F: FibrationStep, samples: int = 100, seed: int = 0) -> float:
    """Max over random group elements of the square-commutation residual."""
    rng = np.random.default_rng(seed)
    M, Mq = F.domain_model, F.quotient_model
    z0 = M.base_point()
    z0q = Mq.base_point()
    worst = 0.0
    for _ in range(samples):
        s = random_element(M, rng, 1.0)
        lhs = project_point(act(s, z0, M), F, check=False)
        rhs = act(push_group(s, F), z0q, Mq)
        worst = max(worst, lhs.distance(rhs))
    return worst


def tower(J: NormalJAlgebra):
    """Iterate the split until the quotient is a point; rank steps down by 1."""
    steps = []
    current = J
    while True:
        fine = fine_structure(current)
        if fine.rank == 0:
            break
        F = split_last_root(current)
        steps.append(F)
        assert fine_structure(F.s_prime).rank == fine.rank - 1
        current = F.s_prime
    return steps
