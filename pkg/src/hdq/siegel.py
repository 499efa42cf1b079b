"""Siegel realization of a normal j-algebra and its affine group action.

The model keeps coordinates adapted to the grading: the (-1)-block basis
starts with the frame vectors xi_1..xi_r (so the cone sits over the
all-ones direction), the 0-block starts with eta_1..eta_r, and the
(-1/2)-block is organized in complex pairs (u, j u) per half-root space.

Group elements are stored in exponential coordinates (x_minus, x_zero) for
exp(x_minus) exp(x_zero); the cached affine map on (z, w)-space is the
displayed action

    (exp(xi + xi'), s) . (z, w)
        = (Ad(s) z + xi + 2i Phi(Ad(s) w, xi') + i Phi(xi', xi'),
           Ad(s) w + xi'),

with the group-level adjoint realized as expm(-ad(x_zero)): one-parameter
flows compose with the opposite bracket, and this choice is what makes the
formula reproduce the closed-form flows of the half-plane generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, expm_frechet, logm

from .errors import (
    DimensionMismatch,
    NotInDomain,
    PositivityUnfixable,
    SolverDiverged,
)
from .jalgebra import NormalJAlgebra, FineStructure, fine_structure
from .lie_core import Subspace, ad_matrix, bracket

CONE_TOL = 1e-9
CONE_MAX_ITER = 100
ORBIT_TOL = 1e-7


def _expm(A):
    return A.copy() if A.size == 0 else expm(A)


def _aligned_basis(V: Subspace) -> np.ndarray:
    """Deterministic orthonormal basis of V aligned with ambient coordinates."""
    n, d = V.ambient_dim, V.dim
    if d == 0:
        return np.zeros((n, 0))
    q = V.orthonormal()
    cols = []
    for i in range(n):
        v = q @ (q.T @ np.eye(n)[i])
        for c in cols:
            v = v - c * (c @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
        if len(cols) == d:
            break
    if len(cols) != d:
        raise DimensionMismatch("could not align a basis with the coordinates")
    return np.column_stack(cols)


def _complex_pairs(space_basis: np.ndarray, j: np.ndarray):
    """Split a j-invariant space into columns U with the space = [U | jU]."""
    n, d = space_basis.shape
    if d % 2:
        raise DimensionMismatch("j-invariant space has odd dimension")
    m = d // 2
    us = []
    taken = np.zeros((n, 0))
    for i in range(d):
        v = space_basis[:, i]
        # remove components on span(us, j us)
        if taken.shape[1]:
            q, _ = np.linalg.qr(taken)
            v = v - q @ (q.T @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v = v / nv
        us.append(v)
        taken = np.column_stack([taken, v, j @ v])
        if len(us) == m:
            break
    if len(us) != m:
        raise DimensionMismatch("could not pair the half-space basis under j")
    U = np.column_stack(us) if us else np.zeros((n, 0))
    return np.hstack([U, j @ U]), m


@dataclass(frozen=True, eq=False)
class SiegelModel:
    J: NormalJAlgebra
    fine: FineStructure
    sigma: int
    C: np.ndarray          # adapted basis, columns [C1 | Ch | C0]
    Cinv: np.ndarray
    p: int                 # dim s_{-1}
    q: int                 # dim s_{-1/2}
    p0: int                # dim s_0
    half_pairs: tuple      # (offset, m_k) per half-root space, in Ch coords
    phi_re: np.ndarray     # (q, q, p)
    phi_im: np.ndarray
    hb: np.ndarray         # bracket of half-block pairs onto s_{-1} coords
    jhalf: np.ndarray      # j restricted to the half block, adapted coords
    ad1_gens: np.ndarray   # (p0, p, p): ad of the 0-basis on the (-1)-block
    adh_gens: np.ndarray   # (p0, q, q)
    hermitian_defect: float

    @property
    def rank(self) -> int:
        return self.fine.rank

    @property
    def dim_complex(self) -> int:
        return self.p + self.q // 2

    @property
    def xi0_coords(self) -> np.ndarray:
        v = np.zeros(self.p)
        v[: self.rank] = 1.0
        return v

    @property
    def delta0_coords(self) -> np.ndarray:
        v = np.zeros(self.p0)
        v[: self.rank] = 1.0
        return v

    def base_point(self) -> "DomainPoint":
        return DomainPoint(1j * self.xi0_coords.astype(complex), np.zeros(self.q))

    # -- coordinate plumbing -------------------------------------------

    def to_adapted(self, v_ambient: np.ndarray) -> np.ndarray:
        return self.Cinv @ np.asarray(v_ambient, dtype=float)

    def to_ambient(self, coords: np.ndarray) -> np.ndarray:
        return self.C @ np.asarray(coords, dtype=float)

    def split_coords(self, v_ambient: np.ndarray):
        c = self.to_adapted(v_ambient)
        return c[: self.p], c[self.p : self.p + self.q], c[self.p + self.q :]

    def phi(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Hermitian form on half-block coordinates, complex (p,)-vector."""
        re = np.einsum("i,j,ijk->k", u, v, self.phi_re)
        im = np.einsum("i,j,ijk->k", u, v, self.phi_im)
        return re + 1j * im

    def to_complex_w(self, w: np.ndarray) -> np.ndarray:
        out = []
        for off, m in self.half_pairs:
            out.append(w[off : off + m] + 1j * w[off + m : off + 2 * m])
        return np.concatenate(out) if out else np.zeros(0, dtype=complex)

    def from_complex_w(self, wc: np.ndarray) -> np.ndarray:
        w = np.zeros(self.q)
        at = 0
        for off, m in self.half_pairs:
            w[off : off + m] = wc[at : at + m].real
            w[off + m : off + 2 * m] = wc[at : at + m].imag
            at += m
        return w


@dataclass(frozen=True)
class DomainPoint:
    z: np.ndarray  # complex, over the adapted s_{-1} basis
    w: np.ndarray  # real, over the adapted s_{-1/2} basis

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))

    def pack(self) -> np.ndarray:
        return np.concatenate([self.z.real, self.z.imag, self.w])

    @staticmethod
    def unpack(v: np.ndarray, p: int, q: int) -> "DomainPoint":
        return DomainPoint(v[:p] + 1j * v[p : 2 * p], v[2 * p :])

    def distance(self, other: "DomainPoint") -> float:
        return float(
            np.linalg.norm(self.z - other.z) + np.linalg.norm(self.w - other.w)
        )


@dataclass(frozen=True)
class GroupElement:
    x_minus: np.ndarray
    x_zero: np.ndarray
    affine_matrix: np.ndarray
    affine_offset: np.ndarray


def build_model(J: NormalJAlgebra) -> SiegelModel:
    """Assemble the Siegel data; fixes the orientation sign of the form."""
    fine = fine_structure(J)
    n = J.dim
    r = fine.rank

    # (-1)-block: frame vectors first, then aligned sum-root bases
    c1_cols = list(fine.xi)
    for rt in fine.roots:
        if rt.label[0] == "sum":
            c1_cols.extend(_aligned_basis(rt.space).T)
    # (-1/2)-block: complex pairs per half-root space
    ch_cols, half_pairs, off = [], [], 0
    for rt in fine.roots:
        if rt.label[0] == "half":
            aligned = _aligned_basis(rt.space)
            paired, m = _complex_pairs(aligned, J.j)
            ch_cols.extend(paired.T)
            half_pairs.append((off, m))
            off += 2 * m
    # 0-block: eta frame, then aligned difference-root bases
    c0_cols = list(fine.eta)
    for rt in fine.roots:
        if rt.label[0] == "diff":
            c0_cols.extend(_aligned_basis(rt.space).T)

    p, q, p0 = len(c1_cols), len(ch_cols), len(c0_cols)
    if n:
        C = np.column_stack(c1_cols + ch_cols + c0_cols)
        if C.shape != (n, n):
            raise DimensionMismatch("adapted basis does not fill the algebra")
        Cinv = np.linalg.inv(C)
    else:
        C = np.zeros((0, 0))
        Cinv = np.zeros((0, 0))

    Ch = C[:, p : p + q]
    # bracket tensors of the half block, in s_{-1} coordinates
    hb = np.zeros((q, q, p))
    jhb = np.zeros((q, q, p))
    for i in range(q):
        for jx in range(q):
            b = bracket(Ch[:, i], Ch[:, jx], J.L)
            jb = bracket(J.j @ Ch[:, i], Ch[:, jx], J.L)
            hb[i, jx] = (Cinv @ b)[:p]
            jhb[i, jx] = (Cinv @ jb)[:p]

    # orientation: the diagonal of the form on each half-root space sits on
    # the matching frame coordinate; one global sign must make it positive
    diag_coeffs = []
    for off, m in half_pairs:
        for i in range(off, off + 2 * m):
            diag_coeffs.append(0.25 * jhb[i, i])
    if diag_coeffs:
        stacked = np.array([d[np.argmax(np.abs(d))] for d in diag_coeffs])
        if np.all(stacked > 1e-12):
            sigma = 1
        elif np.all(stacked < -1e-12):
            sigma = -1
        else:
            raise PositivityUnfixable(
                "no global sign makes the Hermitian form cone-positive"
            )
    else:
        sigma = 1
    phi_re = sigma * 0.25 * jhb
    phi_im = sigma * 0.25 * hb

    jhalf = (Cinv @ (J.j @ Ch))[p : p + q] if q else np.zeros((0, 0))

    # ad generators of the 0-block on the graded pieces
    ad1 = np.zeros((p0, p, p))
    adh = np.zeros((p0, q, q))
    for a in range(p0):
        A = ad_matrix(C[:, p + q + a], J.L)
        full = Cinv @ A @ C
        ad1[a] = full[:p, :p]
        adh[a] = full[p : p + q, p : p + q]

    model = SiegelModel(
        J=J,
        fine=fine,
        sigma=sigma,
        C=C,
        Cinv=Cinv,
        p=p,
        q=q,
        p0=p0,
        half_pairs=tuple(half_pairs),
        phi_re=phi_re,
        phi_im=phi_im,
        hb=hb,
        jhalf=jhalf,
        ad1_gens=ad1,
        adh_gens=adh,
        hermitian_defect=0.0,
    )
    defect = _hermitian_defect(model)
    object.__setattr__(model, "hermitian_defect", defect)
    if defect > 1e-8:
        raise PositivityUnfixable(
            f"Hermitian axioms fail by {defect:.2e} after orientation fix"
        )
    return model


def _hermitian_defect(M: SiegelModel) -> float:
    """Max violation of complex linearity, Hermitian symmetry, and real
    nonnegative diagonal over half-block basis pairs."""
    q = M.q
    worst = 0.0
    eye = np.eye(q)
    for i in range(q):
        for j in range(q):
            u, v = eye[i], eye[j]
            lin = M.phi(M.jhalf @ u, v) - 1j * M.phi(u, v)
            herm = M.phi(v, u) - np.conj(M.phi(u, v))
            worst = max(worst, float(np.max(np.abs(lin))) if lin.size else 0.0)
            worst = max(worst, float(np.max(np.abs(herm))) if herm.size else 0.0)
        d = M.phi(eye[i], eye[i])
        if d.size:
            worst = max(worst, float(np.max(np.abs(d.imag))))
    return worst


# ---------------------------------------------------------------------------
# group elements and the action
# ---------------------------------------------------------------------------

def _ad_blocks(M: SiegelModel, x_zero: np.ndarray):
    A1 = np.einsum("a,aij->ij", x_zero, M.ad1_gens) if M.p0 else np.zeros((M.p, M.p))
    Ah = np.einsum("a,aij->ij", x_zero, M.adh_gens) if M.p0 else np.zeros((M.q, M.q))
    return A1, Ah


def group_element(M: SiegelModel, x_minus, x_zero) -> GroupElement:
    """Build a group element and cache its affine map on (z, w)-space."""
    x_minus = np.asarray(x_minus, dtype=float)
    x_zero = np.asarray(x_zero, dtype=float)
    if x_minus.shape != (M.p + M.q,) or x_zero.shape != (M.p0,):
        raise DimensionMismatch("group coordinates have wrong lengths")
    p, q = M.p, M.q
    xi, xip = x_minus[:p], x_minus[p:]
    A1, Ah = _ad_blocks(M, x_zero)
    E1, Eh = _expm(-A1), _expm(-Ah)

    # 2i Phi(Eh w, xi') = (-2 Fim + 2i Fre)(Eh w, xi')
    Kre = np.einsum("ijk,j->ki", M.phi_re, xip) if q else np.zeros((p, 0))
    Kim = np.einsum("ijk,j->ki", M.phi_im, xip) if q else np.zeros((p, 0))
    Lre = -2.0 * (Kim @ Eh)
    Lim = 2.0 * (Kre @ Eh)

    phi_diag = M.phi(xip, xip) if q else np.zeros(p, dtype=complex)

    dim = 2 * p + q
    mat = np.zeros((dim, dim))
    mat[:p, :p] = E1
    mat[p : 2 * p, p : 2 * p] = E1
    mat[:p, 2 * p :] = Lre
    mat[p : 2 * p, 2 * p :] = Lim
    mat[2 * p :, 2 * p :] = Eh
    # z gains xi + i Phi(xi', xi'); the diagonal of the form is real
    off = np.zeros(dim)
    off[:p] = xi - phi_diag.imag
    off[p : 2 * p] = phi_diag.real
    off[2 * p :] = xip
    return GroupElement(x_minus, x_zero, mat, off)


def identity(M: SiegelModel) -> GroupElement:
    return group_element(M, np.zeros(M.p + M.q), np.zeros(M.p0))


def act(g: GroupElement, point: DomainPoint, M: SiegelModel) -> DomainPoint:
    v = g.affine_matrix @ point.pack() + g.affine_offset
    return DomainPoint.unpack(v, M.p, M.q)


def compose(g: GroupElement, h: GroupElement, M: SiegelModel) -> GroupElement:
    """Product g h in exponential coordinates.

    The minus-part combines through the 2-step nilpotent Baker-Campbell-
    Hausdorff formula after conjugating h's translation part by g's
    0-component; the 0-parts multiply through a matrix log in the adjoint
    picture.
    """
    p, q = M.p, M.q
    A1, Ah = _ad_blocks(M, g.x_zero)
    c_xi = _expm(-A1) @ h.x_minus[:p]
    c_xip = _expm(-Ah) @ h.x_minus[p:]
    corr = (
        np.einsum("i,j,ijk->k", g.x_minus[p:], c_xip, M.hb)
        if q
        else np.zeros(p)
    )
    x_minus = np.concatenate(
        [g.x_minus[:p] + c_xi - 0.5 * corr, g.x_minus[p:] + c_xip]
    )
    x_zero = _combine_zero(M, g.x_zero, h.x_zero)
    return group_element(M, x_minus, x_zero)


def _combine_zero(M: SiegelModel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if M.p0 == 0:
        return np.zeros(0)
    if np.linalg.norm(a) < 1e-15:
        return b.copy()
    if np.linalg.norm(b) < 1e-15:
        return a.copy()
    n = M.J.dim
    gens = np.stack([ad_matrix(M.C[:, M.p + M.q + i], M.J.L) for i in range(M.p0)])
    K = _expm(-np.einsum("a,aij->ij", a, gens)) @ _expm(-np.einsum("a,aij->ij", b, gens))
    X = logm(K)
    X = np.real_if_close(X, tol=1e6).real
    stack = gens.reshape(M.p0, n * n).T
    v, *_ = np.linalg.lstsq(stack, -X.flatten(), rcond=None)
    return v


def inverse(g: GroupElement, M: SiegelModel) -> GroupElement:
    """Inverse element: exp(x0)^-1 exp(-x_minus) reassembled in layer form."""
    p, q = M.p, M.q
    A1, Ah = _ad_blocks(M, g.x_zero)
    y_xi = -(_expm(A1) @ g.x_minus[:p])
    y_xip = -(_expm(Ah) @ g.x_minus[p:])
    return group_element(M, np.concatenate([y_xi, y_xip]), -g.x_zero)


# ---------------------------------------------------------------------------
# cone membership and orbit inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeResult:
    inside: bool
    residual: float
    witness: np.ndarray | None


def cone_contains(x, M: SiegelModel, tol: float = CONE_TOL) -> ConeResult:
    """Gauss-Newton solve of Ad(exp g) xi0 = x over the 0-block.

    The 0-group acts simply transitively on the cone, so membership in the
    open cone is exactly solvability; divergence is reported as outside
    (or numerically undecidable) with the best residual seen.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (M.p,):
        raise DimensionMismatch("cone query must live in the (-1)-block")
    if M.p == 0:
        return ConeResult(True, 0.0, np.zeros(M.p0))
    xi0 = M.xi0_coords
    nx = float(np.linalg.norm(x))
    if nx < 1e-13 * max(1.0, float(np.linalg.norm(xi0))):
        return ConeResult(False, nx, None)
    scale = max(1.0, nx)

    lam = nx / float(np.linalg.norm(xi0))
    g = np.log(lam) * M.delta0_coords

    def residual(gv):
        E = _expm(-np.einsum("a,aij->ij", gv, M.ad1_gens))
        return E @ xi0 - x

    r = residual(g)
    best = float(np.linalg.norm(r)) / scale
    for _ in range(CONE_MAX_ITER):
        rn = float(np.linalg.norm(r)) / scale
        best = min(best, rn)
        if rn < tol:
            return ConeResult(True, rn, g)
        A = -np.einsum("a,aij->ij", g, M.ad1_gens)
        Jcols = []
        for a in range(M.p0):
            _, dE = expm_frechet(A, -M.ad1_gens[a])
            Jcols.append(dE @ xi0)
        Jmat = np.column_stack(Jcols)
        step, *_ = np.linalg.lstsq(Jmat, -r, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        # halve the step while the residual grows
        accepted = False
        for _ in range(30):
            g_new = g + step
            if np.linalg.norm(g_new) > 80.0:
                step = 0.5 * step
                continue
            r_new = residual(g_new)
            if np.linalg.norm(r_new) < np.linalg.norm(r):
                g, r = g_new, r_new
                accepted = True
                break
            step = 0.5 * step
        if not accepted:
            break
    rn = float(np.linalg.norm(r)) / scale
    return ConeResult(rn < tol, min(best, rn), g if rn < tol else None)


def domain_defect(point: DomainPoint, M: SiegelModel) -> np.ndarray:
    """im(z) - Phi(w, w), the vector whose cone membership defines D."""
    quad = np.einsum("i,j,ijk->k", point.w, point.w, M.phi_re) if M.q else np.zeros(M.p)
    return point.z.imag - quad


def contains(point: DomainPoint, M: SiegelModel, tol: float = CONE_TOL) -> bool:
    if M.p == 0:
        return True
    return cone_contains(domain_defect(point, M), M, tol).inside


def solve_orbit(point: DomainPoint, M: SiegelModel, tol: float = ORBIT_TOL) -> GroupElement:
    """The unique group element mapping the base point to ``point``.

    Layered: the half-block translation is read off the w-coordinate, the
    0-part comes from the cone witness of im(z) - Phi(w,w), and the
    remaining translation is re(z).
    """
    if M.p == 0:
        return identity(M)
    defect = domain_defect(point, M)
    cone = cone_contains(defect, M, min(tol, CONE_TOL))
    if not cone.inside:
        raise NotInDomain(
            f"point is outside the domain or undecidable (cone residual {cone.residual:.2e})"
        )
    x_minus = np.concatenate([point.z.real, point.w])
    g = group_element(M, x_minus, cone.witness)
    res = act(g, M.base_point(), M).distance(point)
    if not np.isfinite(res) or res > tol * max(1.0, float(np.linalg.norm(point.pack()))):
        raise SolverDiverged(f"orbit solve residual {res:.2e} exceeds {tol:.2e}")
    return g


# ---------------------------------------------------------------------------
# fundamental vector fields and sampling
# ---------------------------------------------------------------------------

def vector_field(x_ambient, point: DomainPoint, M: SiegelModel) -> np.ndarray:
    """Value at ``point`` of the field generated by an algebra element.

    Returns a complex vector over the complex coordinates (z, w); the
    w-block uses the complex pairing of the model.
    """
    xi, xip, x0 = M.split_coords(np.asarray(x_ambient, dtype=float))
    A1, Ah = _ad_blocks(M, x0)
    dz = -(A1 @ point.z) + xi.astype(complex)
    if M.q:
        dz = dz + 2j * M.phi(point.w, xip)
        dw = -(Ah @ point.w) + xip
    else:
        dw = np.zeros(0)
    # complexify the w-velocity
    dwc = M.to_complex_w(dw)
    return np.concatenate([dz, dwc])


def random_element(M: SiegelModel, rng, bound: float = 1.0) -> GroupElement:
    return group_element(
        M,
        rng.uniform(-bound, bound, M.p + M.q),
        rng.uniform(-bound, bound, M.p0),
    )


def random_interior_point(M: SiegelModel, rng) -> DomainPoint:
    """Sample from the interior: im(z) = Phi(w,w) + (cone point)."""
    w = rng.uniform(-1.0, 1.0, M.q)
    if M.q:
        nw = np.linalg.norm(w)
        if nw > 1.0:
            w = w / nw * rng.uniform(0.2, 1.0)
    g0 = rng.uniform(-1.0, 1.0, M.p0)
    cone_pt = _expm(-np.einsum("a,aij->ij", g0, M.ad1_gens)) @ M.xi0_coords
    quad = np.einsum("i,j,ijk->k", w, w, M.phi_re) if M.q else np.zeros(M.p)
    z = rng.uniform(-2.0, 2.0, M.p) + 1j * (quad + cone_pt)
    return DomainPoint(z, w)


# ---------------------------------------------------------------------------
# point / group element I/O
# ---------------------------------------------------------------------------

def point_to_dict(pt: DomainPoint) -> dict:
    return {
        "z": [[float(c.real), float(c.imag)] for c in pt.z],
        "w": [float(v) for v in pt.w],
    }


def point_from_dict(data: dict) -> DomainPoint:
    z = np.array([complex(re, im) for re, im in data["z"]], dtype=complex)
    return DomainPoint(z, np.asarray(data.get("w", []), dtype=float))


def group_to_dict(g: GroupElement) -> dict:
    return {
        "x_minus": [float(v) for v in g.x_minus],
        "x_zero": [float(v) for v in g.x_zero],
    }


def group_from_dict(M: SiegelModel, data: dict) -> GroupElement:
    return group_element(
        M,
        np.asarray(data["x_minus"], dtype=float),
        np.asarray(data["x_zero"], dtype=float),
    )


def load_point(path) -> DomainPoint:
    with open(path, "r", encoding="utf-8") as fh:
        return point_from_dict(json.load(fh))
