"""Command line front end.

Verbs:
    decompose   multiplicity table of the indecomposable blocks, 2^n audit
    idempotent  dump a projector family (coefficients, checks, matrices)
    verify      exact verification suites; nonzero exit on any failure
    bratteli    block dimensions by chain length, critical lines, orbits
    cycles      coefficient label grid with cycles and bound pairs
    spectrum    numeric Hamiltonian block spectra (the one float path)
    psi         link pattern images in the chain

Every run is deterministic given its flags.  Exit code 0 means every
requested check passed; 1 means some check failed; 2 means the flags were
rejected (including desk-scale cap refusals, which TLQ_MAX_N can override
at the caller's risk).
"""

import argparse
import cmath
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .idempotent import coeff_a, family_j2, idempotent_z, verify_family
from .linkstate import link_basis, verify_psi_homomorphism, psi_sparse
from .qnum import (CycloNumber, LaurentPoly, RatFunc, RootSpec, q_binomial,
                   q_int, q_lucas, identity_a, identity_b)
from .rootlimit import (_jlabel, _orbits, cycle_diagram, is_critical,
                        multiplicities, projector_family, _op_json)
from .spinrep import (Operator, dim_weight, divided_power, gamma_dim,
                      hamiltonian, highest_weight_vectors, s_r_operator,
                      weight_space)

_CAPS = {
    "decompose": 64,
    "cycles": 64,
    "bratteli": 40,
    "idempotent": 12,
    "idempotent-root": 10,
    "verify": 12,
    "verify-root": 10,
    "appendix": 8,
    "spectrum": 14,
    "psi": 10,
}


class Refusal(Exception):
    """Flag combination rejected before any work is done; exit code 2."""


def _cap_check(kind: str, n: int, what: str = "n"):
    cap = _CAPS[kind]
    env = os.environ.get("TLQ_MAX_N")
    if env is not None:
        try:
            lifted = int(env)
        except ValueError:
            raise Refusal(f"TLQ_MAX_N={env!r} is not an integer")
        if lifted > cap:
            print(f"warning: TLQ_MAX_N={lifted} overrides the {kind} cap "
                  f"{what} <= {cap}; expect long runtimes", file=sys.stderr)
            cap = lifted
    if n > cap:
        raise Refusal(
            f"{what}={n} exceeds the {kind} cap {what} <= {cap} "
            f"(set TLQ_MAX_N to override at your own risk)")


# ---------------------------------------------------------------------------
# Flag parsing helpers.

def _parse_spin(text: str) -> int:
    """Spin value as a doubled integer; accepts "3" or fraction syntax "3/2"."""
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise Refusal(f"cannot parse spin value {text!r}")
    d = f * 2
    if d.denominator != 1:
        raise Refusal(f"spin {text!r} is neither integer nor half-integer")
    return int(d)


def _parse_q(text: str):
    """Numeric q for the spectrum verb: a rational like "7/5" or a complex
    literal like "0.7+0.3j"."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise Refusal(f"cannot parse q value {text!r}")


def _root_from(args) -> RootSpec:
    try:
        return RootSpec(args.p, args.l)
    except ValueError as e:
        raise Refusal(str(e))


def _weight_or_default(args, n: int) -> int:
    if args.m is None:
        return n % 2
    m2 = _parse_spin(args.m)
    if m2 < 0 or m2 > n or (n - m2) % 2:
        raise Refusal(f"no weight space m={args.m} on the {n}-site chain")
    return m2


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# decompose

def cmd_decompose(args) -> int:
    _cap_check("decompose", args.n)
    root = _root_from(args) if args.p else None
    rep = multiplicities(args.n, root)
    focus = _parse_spin(args.m) if args.m is not None else None
    if focus is not None and focus not in rep.per_weight:
        raise Refusal(f"no weight space m={args.m} on the {args.n}-site chain")
    if args.format == "json":
        data = rep.to_json()
        if focus is not None:
            data["focus_m"] = _jlabel(focus)
        _emit(args, _dump_json(data))
    elif focus is not None:
        _emit(args, _weight_text(rep, focus))
    else:
        _emit(args, rep.to_text())
    return 0 if rep.all_pass else 1


def _weight_text(rep, m2: int) -> str:
    head = f"decomposition of W[{_jlabel(m2)}], {rep.n}-site chain"
    if rep.root:
        head += f" at p={rep.root.p} (q = exp(i*pi*{rep.root.l}/{rep.root.p}))"
    else:
        head += " (generic q)"
    lines = [head]
    for b in rep.per_weight[m2]:
        name = f"{b['module']}[{_jlabel(b['j2'])}]"
        note = b["kind"]
        if "pair" in b:
            note = f"pair ({_jlabel(b['pair'][0])},{_jlabel(b['pair'][1])})"
        lines.append(f"  {name:<8}dim {b['dimension']:<8}{note}")
    total = sum(b["dimension"] for b in rep.per_weight[m2])
    ok = "ok" if total == dim_weight(rep.n, m2) else "FAIL"
    lines.append(f"  dim W[{_jlabel(m2)}] = {total}  [{ok}]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cycles

def cmd_cycles(args) -> int:
    _cap_check("cycles", args.n)
    m2 = _weight_or_default(args, args.n)
    if args.p < 2:
        raise Refusal("p >= 2 required")
    diagram = cycle_diagram(args.n, m2, args.p)
    if args.format == "json":
        _emit(args, _dump_json(diagram.to_json()))
    else:
        _emit(args, diagram.to_text())
    return 0


# ---------------------------------------------------------------------------
# idempotent

def cmd_idempotent(args) -> int:
    n = args.n
    m2 = _weight_or_default(args, n)
    want = _parse_spin(args.j) if args.j is not None else None
    if args.p:
        _cap_check("idempotent-root", n)
        root = _root_from(args)
        fam = projector_family(n, m2, root)
        data = fam.to_json(with_matrices=args.matrices)
        if want is not None:
            filtered = [row for m, row in zip(fam.members, data["members"])
                        if want in m.j2]
            if not filtered:
                raise Refusal(f"no family member carries j={args.j}")
            data["members"] = filtered
        if args.format == "json":
            _emit(args, _dump_json(data))
        else:
            _emit(args, _family_text(data))
        return 0 if fam.all_pass else 1
    _cap_check("idempotent", n)
    js = [j2 for j2 in family_j2(n, m2) if want is None or j2 == want]
    if not js:
        raise Refusal(f"no generic idempotent with j={args.j} on W[{_jlabel(m2)}]")
    members = []
    for j2 in js:
        row = {
            "j": _jlabel(j2),
            "trace": gamma_dim(n, j2),
            "coefficients": [
                {"i": i, "value": coeff_a(i, j2, m2).format()}
                for i in range((j2 - m2) // 2, (n - m2) // 2 + 1)
            ],
        }
        if args.matrices:
            row["matrix"] = _op_json(idempotent_z(n, j2, m2))
        members.append(row)
    data = {"n": n, "m": _jlabel(m2), "root": None, "members": members}
    if args.format == "json":
        _emit(args, _dump_json(data))
    else:
        lines = [f"generic projector family on W[{data['m']}], n={n}"]
        for row in members:
            lines.append(f"z[{row['j']}]  trace {row['trace']}")
            for c in row["coefficients"]:
                lines.append(f"  a_{c['i']} = {c['value']}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _family_text(data) -> str:
    head = (f"projector family on W[{data['m']}], n={data['n']}, "
            f"p={data['root']['p']}, l={data['root']['l']}")
    lines = [head]
    if data.get("note"):
        lines.append(f"note: {data['note']}")
    for row in data["members"]:
        j = row["j"]
        name = f"z[({j[0]},{j[1]})]" if isinstance(j, list) else f"z[{j}]"
        checks = " ".join(f"{k}={'ok' if v else 'FAIL'}"
                          for k, v in row["checks"].items())
        lines.append(f"{name:<12} {row['kind']:<9} trace {row['trace']:<5} {checks}")
    for k, v in data["checks"].items():
        mark = "skip" if v is None else ("ok" if v else "FAIL")
        lines.append(f"family {k}: {mark}")
    lines.append("all_pass: " + ("ok" if data["all_pass"] else "FAIL"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    suites = []
    if args.appendix:
        _cap_check("appendix", args.max, "max")
        checks = appendix_suites(args.max)
        suites.append({"suite": "identities", "params": {"max": args.max},
                       "checks": checks, "all_pass": all(checks.values())})
    if args.n is not None:
        n = args.n
        weights = ([_weight_or_default(args, n)] if args.m is not None
                   else list(range(n % 2, n + 1, 2)))
        if args.p:
            _cap_check("verify-root", n)
            root = _root_from(args)
            for m2 in weights:
                fam = projector_family(n, m2, root)
                rep = fam.to_json()
                suites.append({
                    "suite": "root-family",
                    "params": {"n": n, "m": _jlabel(m2),
                               "p": root.p, "l": root.l},
                    "checks": _family_checks(rep),
                    "report": rep,
                    "all_pass": fam.all_pass,
                })
        else:
            _cap_check("verify", n)
            for m2 in weights:
                rep = verify_family(n, m2, mode=args.mode)
                checks = {
                    "family_all_pass": rep["all_pass"],
                    "orthogonality": rep["orthogonality"],
                    "partition_of_unity": rep["partition_of_unity"],
                    "primitive_certified": rep["primitive_certified"],
                }
                suites.append({
                    "suite": "generic-family",
                    "params": {"n": n, "m": _jlabel(m2), "mode": rep["mode"]},
                    "checks": checks,
                    "report": rep,
                    "all_pass": rep["all_pass"],
                })
    if not suites:
        raise Refusal("nothing to verify: pass --n and/or --appendix")
    ok = all(s["all_pass"] for s in suites)
    data = {"suites": suites, "all_pass": ok}
    if args.format == "json":
        _emit(args, _dump_json(data))
    else:
        lines = []
        for s in suites:
            tag = " ".join(f"{k}={v}" for k, v in s["params"].items())
            for name, val in s["checks"].items():
                mark = "SKIP" if val is None else ("PASS" if val else "FAIL")
                lines.append(f"{mark}  [{s['suite']} {tag}] {name}")
        lines.append("all_pass: " + ("ok" if ok else "FAIL"))
        _emit(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


def _family_checks(rep) -> dict:
    """Flatten a family report into one pass/fail row per named check."""
    out = {}
    for row in rep["members"]:
        j = row["j"]
        name = f"({j[0]},{j[1]})" if isinstance(j, list) else str(j)
        for k, v in row["checks"].items():
            out[f"z[{name}].{k}"] = v
    out.update(rep["checks"])
    return out


# ---------------------------------------------------------------------------
# Identity suites.  Each returns quietly or raises; the dict records which
# closed-form identities held exactly.  Ranges are desk scale on purpose.

def _suite_qint_products(kmax: int) -> bool:
    for b in range(1, kmax + 1):
        for c in range(1, kmax + 1):
            total = LaurentPoly()
            for s in range(min(b, c)):
                total = total + q_int(b + c - 1 - 2 * s)
            if q_int(b) * q_int(c) != total:
                return False
    return True


def _suite_telescoping(kmax: int) -> bool:
    for k in range(1, kmax + 1):
        for j2 in range(0, 2 * kmax + 1):
            for l in range(k):
                if not identity_a(l, j2, k):
                    return False
    for i in range(1, kmax + 1):
        for m2 in range(0, 2 * kmax + 1):
            for l in range(i):
                if not identity_b(l, m2, i):
                    return False
    return True


def _suite_root_binomials() -> bool:
    # q_lucas asserts its own factorization and vanishing claims
    for p in (2, 3, 4, 5):
        root = RootSpec(p, 1)
        for k in range(4):
            for kp in range(4):
                for a in range(p):
                    for ap in range(p):
                        q_lucas(k, kp, a, ap, root)
    return True


def _suite_weight_shift(nmax: int) -> bool:
    for n in range(2, nmax + 1):
        for m2 in range(n % 2, n + 1, 2):
            for sign in (1, -1):
                rmax = (n - sign * m2) // 2
                for t in range(1, min(rmax, 2) + 1):
                    dp = divided_power(n, m2, t, sign)
                    for k in range(-2, 4):
                        lhs = dp.scale(q_int(m2 + k))
                        rhs = dp.scale(q_int(m2 + 2 * sign * t + k - 2 * sign * t))
                        if lhs != rhs:
                            return False
    return True


def _suite_product_structure(nmax: int) -> bool:
    # S_k S_l = sum_i qbin(l+i,k) qbin(l+i,l) qbin(2m+k+l,k-i) S_(l+i), l >= k
    for n in range(2, nmax + 1):
        for m2 in range(n % 2, n + 1, 2):
            rmax = (n - m2) // 2
            for l in range(rmax + 2):
                for k in range(l + 1):
                    W = weight_space(n, m2)
                    lhs = s_r_operator(n, m2, k) @ s_r_operator(n, m2, l)
                    rhs = Operator.zero(W, W)
                    for i in range(k + 1):
                        c = (q_binomial(l + i, k) * q_binomial(l + i, l)
                             * q_binomial(m2 + k + l, k - i))
                        rhs = rhs + s_r_operator(n, m2, l + i).scale(c)
                    if lhs != rhs:
                        return False
    return True


def _suite_commuting_family(nmax: int) -> bool:
    for n in range(2, nmax + 1):
        for m2 in range(n % 2, n + 1, 2):
            ops = [s_r_operator(n, m2, r) for r in range((n - m2) // 2 + 1)]
            for a in range(len(ops)):
                for b in range(a + 1, len(ops)):
                    if ops[a] @ ops[b] != ops[b] @ ops[a]:
                        return False
    return True


def _suite_diagonal_action(nmax: int) -> bool:
    """S_r acts on the k-th descent of a spin-j tower by the scalar
    qbin(j+m+r, r) qbin(k, r); exact on every highest-weight vector."""
    zero = RatFunc.zero()
    for n in range(2, nmax + 1):
        for j2 in range(n % 2, n + 1, 2):
            for vec in highest_weight_vectors(n, j2):
                hw = {i: x for i, x in enumerate(vec) if x != zero}
                for k in range(j2 + 1):
                    m2 = j2 - 2 * k
                    d = divided_power(n, j2, k, -1).apply(hw) if k else hw
                    if not d:
                        return False
                    for r in range((n - m2) // 2 + 1):
                        got = s_r_operator(n, m2, r).apply(d)
                        scal = (q_binomial((j2 + m2) // 2 + r, r)
                                * q_binomial(k, r))
                        expect = ({i: scal * x for i, x in d.items()}
                                  if scal else {})
                        if got != expect:
                            return False
    return True


def appendix_suites(max_n: int) -> dict:
    """The closed-form identity suites behind the construction, ranges
    keyed to max_n where a chain length is involved."""
    small = min(max_n, 5)
    return {
        "qint_product_expansion": _suite_qint_products(10),
        "telescoping_sums": _suite_telescoping(3),
        "root_binomial_factorization": _suite_root_binomials(),
        "divided_power_weight_shift": _suite_weight_shift(small),
        "s_product_structure": _suite_product_structure(min(max_n, 6)),
        "s_family_commutes": _suite_commuting_family(min(max_n, 6)),
        "s_diagonal_action": _suite_diagonal_action(small),
    }


# ---------------------------------------------------------------------------
# bratteli

def cmd_bratteli(args) -> int:
    _cap_check("bratteli", args.n)
    n, p = args.n, args.p
    rows = []
    for k in range(n + 1):
        rows.append({"n": k, "gamma": {str(_jlabel(j2)): gamma_dim(k, j2)
                                          for j2 in range(k % 2, k + 1, 2)}})
    critical = ([j2 for j2 in range(n + 1) if is_critical(j2, p)]
                if p else [])
    orbits = _orbits(n, p)[0] if p else []
    if args.format == "json":
        data = {
            "n": n,
            "p": p,
            "rows": rows,
            "critical": [_jlabel(j2) for j2 in critical],
            "orbits": [[_jlabel(j2) for j2 in orb] for orb in orbits],
        }
        _emit(args, _dump_json(data))
        return 0
    _emit(args, _bratteli_text(n, p, rows, critical, orbits))
    return 0


_ORBIT_MARKS = "●○◆◇▲△"


def _bratteli_text(n, p, rows, critical, orbits) -> str:
    cw = 6
    cols = list(range(n + 1))  # doubled j
    crit = set(critical)
    head = f"block dimensions by chain length, n = {n}"
    if p:
        head += f", p = {p}"
    lines = [head]
    lines.append("      " + "".join(f"{'j=' + str(_jlabel(j2)):>{cw}}" for j2 in cols))
    for row in rows:
        cells = []
        for j2 in cols:
            val = row["gamma"].get(str(_jlabel(j2)))
            if val is not None:
                cells.append(f"{val:>{cw}}")
            elif j2 in crit:
                cells.append(f"{'|':>{cw}}")
            else:
                cells.append(" " * cw)
        lines.append(f"n={row['n']:<4}" + "".join(cells).rstrip())
    if p:
        owner = {}
        for t, orb in enumerate(orbits):
            for j2 in orb:
                owner[j2] = t
        cells = []
        for j2 in cols:
            if j2 % 2 != n % 2:
                cells.append(" " * cw)
            elif j2 in crit:
                cells.append(f"{'|':>{cw}}")
            else:
                mk = _ORBIT_MARKS[owner[j2] % len(_ORBIT_MARKS)]
                cells.append(f"{mk:>{cw}}")
        lines.append("      " + "".join(cells).rstrip())
        for t, orb in enumerate(orbits):
            mk = _ORBIT_MARKS[t % len(_ORBIT_MARKS)]
            lines.append(f"orb{t} ({mk}): j = "
                         + ", ".join(str(_jlabel(j2)) for j2 in orb))
        if critical:
            lines.append("critical: j = "
                         + ", ".join(str(_jlabel(j2)) for j2 in critical))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# spectrum

def _to_complex(x, v: complex) -> complex:
    if isinstance(x, LaurentPoly):
        return x.eval_complex(v)
    if isinstance(x, RatFunc):
        den = x.den.eval_complex(v)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at this q")
        return x.num.eval_complex(v) / den
    if isinstance(x, CycloNumber):
        return x.to_complex()
    return complex(Fraction(x))


def _numeric_matrix(op, v: complex) -> np.ndarray:
    rows, cols = op.shape
    out = np.zeros((rows, cols), dtype=complex)
    for (r, c), x in op.ent.items():
        out[r, c] = _to_complex(x, v)
    return out


def _fmt_c(z: complex) -> str:
    re = 0.0 if abs(z.real) < 1e-12 else z.real
    im = 0.0 if abs(z.imag) < 1e-12 else z.imag
    if im == 0.0:
        return f"{re:.10g}"
    return f"{re:.10g}{im:+.10g}i"


def _eig_key(z: complex):
    return (round(z.real, 9), round(z.imag, 9))


def cmd_spectrum(args) -> int:
    _cap_check("spectrum", args.n)
    n = args.n
    m2 = _weight_or_default(args, n)
    if args.p:
        root = _root_from(args)
        v = root.v_complex()
        qval = root.q_complex()
        qtext = f"exp(i*pi*{root.l}/{root.p})"
        fam = projector_family(n, m2, root)
        blocks = [(m.jlabel() if m.kind == "pair" else m.jlabel()[0],
                   m.trace_expected,
                   _numeric_matrix(m.projector, v)) for m in fam.members]
    else:
        if args.q is None:
            raise Refusal("spectrum needs --q (or --p for a root of unity)")
        qv = _parse_q(args.q)
        qval = complex(qv) if isinstance(qv, Fraction) else qv
        if qval == 0:
            raise Refusal("q must be nonzero")
        qtext = args.q
        v = cmath.sqrt(qval)
        blocks = []
        for j2 in family_j2(n, m2):
            z = idempotent_z(n, j2, m2)
            try:
                mat = _numeric_matrix(z, v)
            except ZeroDivisionError:
                raise Refusal(
                    f"projector z[{_jlabel(j2)}] has a pole at q={args.q}; "
                    f"use --p/--l for roots of unity")
            blocks.append((_jlabel(j2), gamma_dim(n, j2), mat))
    H = _numeric_matrix(hamiltonian(n, m2), v)
    normH = float(np.linalg.norm(H))
    rows = []
    all_eigs = []
    ok_comm = ok_dims = ok_cond = True
    for label, dim_expected, P in blocks:
        normP = float(np.linalg.norm(P))
        comm = float(np.linalg.norm(H @ P - P @ H))
        idem = float(np.linalg.norm(P @ P - P))
        comm_ok = comm <= 1e-9 * normH * normP
        # an exact projector evaluates with |P^2 - P| at rounding scale; a
        # blow-up near a coefficient pole fails this long before it hits inf
        cond_ok = idem <= 1e-6 * (1.0 + normP)
        U, sv, _ = np.linalg.svd(P)
        tol = max(P.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
        r = int((sv > max(tol, 1e-9 * (sv[0] if sv.size else 0.0))).sum())
        B = U[:, :r]
        eigs = sorted(np.linalg.eigvals(B.conj().T @ H @ B), key=_eig_key)
        dims_ok = r == dim_expected
        ok_comm &= comm_ok
        ok_dims &= dims_ok
        ok_cond &= cond_ok
        all_eigs.extend(eigs)
        rows.append({
            "j": label if not isinstance(label, tuple) else list(label),
            "dim": r,
            "dim_expected": dim_expected,
            "eigenvalues": [{"re": e.real, "im": e.imag} for e in eigs],
            "residuals": {"commutator": comm, "idempotency": idem},
            "checks": {"commutes_with_h": comm_ok, "dim_matches": dims_ok,
                       "well_conditioned": cond_ok},
        })
    href = sorted(np.linalg.eigvals(H), key=_eig_key)
    union = sorted(all_eigs, key=_eig_key)
    tol = 1e-8 * max(1.0, normH)
    union_ok = (len(union) == len(href)
                and all(abs(a - b) <= tol for a, b in zip(union, href)))
    checks = {"commutators": ok_comm, "block_dims": ok_dims,
              "spectrum_union": union_ok, "conditioning": ok_cond}
    data = {"n": n, "m": _jlabel(m2), "q": qtext, "blocks": rows,
            "checks": checks, "all_pass": all(checks.values())}
    if args.format == "json":
        _emit(args, _dump_json(data))
    else:
        lines = [f"spectrum of H on W[{data['m']}], n={n}, q={qtext}"]
        for row in rows:
            j = row["j"]
            name = f"({j[0]},{j[1]})" if isinstance(j, list) else str(j)
            vals = ", ".join(_fmt_c(complex(e["re"], e["im"]))
                             for e in row["eigenvalues"])
            lines.append(f"block z[{name}]  dim {row['dim']}  eigenvalues: {vals}")
            if not all(row["checks"].values()):
                res = row["residuals"]
                lines.append(f"  ill-conditioned: |[H,P]| = {res['commutator']:.3e}, "
                             f"|P^2-P| = {res['idempotency']:.3e}")
        for k, okv in checks.items():
            lines.append(f"{'PASS' if okv else 'FAIL'}  {k}")
        _emit(args, "\n".join(lines) + "\n")
    return 0 if data["all_pass"] else 1


# ---------------------------------------------------------------------------
# psi

def _state_str(state) -> str:
    return "".join("+" if s > 0 else "-" for s in state)


def cmd_psi(args) -> int:
    _cap_check("psi", args.n)
    n = args.n
    ells = ([args.ell] if args.ell is not None
            else list(range(n // 2 + 1)))
    for ell in ells:
        if ell < 0 or 2 * ell > n:
            raise Refusal(f"no link states with {ell} arcs on {n} sites")
    tables = []
    ok = True
    for ell in ells:
        m2 = n - 2 * ell
        W = weight_space(n, m2)
        pats = []
        for w in link_basis(n, ell):
            img = psi_sparse(n, w)
            pats.append({
                "arcs": [list(a) for a in w.arcs],
                "image": [{"state": _state_str(W.states[k]),
                           "value": img[k].format()}
                          for k in sorted(img)],
            })
        row = {"ell": ell, "m": _jlabel(m2), "patterns": pats}
        if args.check:
            row["homomorphism"] = verify_psi_homomorphism(n, ell)
            ok &= row["homomorphism"]
        tables.append(row)
    data = {"n": n, "tables": tables, "all_pass": ok}
    if args.format == "json":
        _emit(args, _dump_json(data))
    else:
        lines = []
        for row in tables:
            lines.append(f"link states on {n} sites, {row['ell']} arcs "
                         f"(weight m={row['m']})")
            for pat in row["patterns"]:
                arcs = "".join(f"({a},{b})" for a, b in pat["arcs"]) or "-"
                terms = "  +  ".join(
                    f"({t['value']}) |{t['state']}>" for t in pat["image"])
                lines.append(f"  {arcs:<24} ->  {terms}")
            if "homomorphism" in row:
                mark = "PASS" if row["homomorphism"] else "FAIL"
                lines.append(f"  {mark}  intertwines the generator action")
        _emit(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Parser plumbing.

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tlspin",
        description="exact Temperley-Lieb decomposition of spin chains")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, n_required=True):
        p.add_argument("--n", type=int, required=n_required,
                       help="number of chain sites")
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--out", help="write the report to this file")

    def rootflags(p):
        p.add_argument("--p", type=int, help="q = exp(i*pi*l/p)")
        p.add_argument("--l", type=int, default=1)

    p = sub.add_parser("decompose", help="indecomposable block multiplicities")
    common(p)
    p.add_argument("--m", help="restrict to one weight space (int or a/b)")
    rootflags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("cycles", help="coefficient label grid at a root")
    common(p)
    p.add_argument("--m", help="weight (int or a/b); default lowest")
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("idempotent", help="dump a projector family")
    common(p)
    p.add_argument("--m", help="weight (int or a/b); default lowest")
    p.add_argument("--j", help="single member (int or a/b)")
    p.add_argument("--matrices", action="store_true",
                   help="include full matrix entries")
    rootflags(p)
    p.set_defaults(func=cmd_idempotent)

    p = sub.add_parser("verify", help="run exact verification suites")
    common(p, n_required=False)
    p.add_argument("--m", help="weight (int or a/b); default all weights")
    p.add_argument("--mode", choices=("auto", "symbolic", "probe"),
                   default="auto", help="generic family verification mode")
    p.add_argument("--appendix", action="store_true",
                   help="run the closed-form identity suites")
    p.add_argument("--max", type=int, default=6,
                   help="size bound for the identity suites")
    rootflags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bratteli", help="block dimension diagram")
    common(p)
    p.add_argument("--p", type=int, help="draw critical lines and orbits")
    p.set_defaults(func=cmd_bratteli)

    p = sub.add_parser("spectrum", help="numeric Hamiltonian block spectra")
    common(p)
    p.add_argument("--m", help="weight (int or a/b); default lowest")
    p.add_argument("--q", help='numeric q: rational "7/5" or complex "0.7+0.3j"')
    rootflags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("psi", help="link pattern images in the chain")
    common(p)
    p.add_argument("--ell", type=int, help="number of arcs; default all")
    p.add_argument("--check", action="store_true",
                   help="verify the action intertwines")
    p.set_defaults(func=cmd_psi)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except Refusal as e:
        print(f"refused: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
