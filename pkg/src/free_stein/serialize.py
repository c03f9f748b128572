"""JSON text forms for polynomials, tensors and kernel matrices.

Words are arrays of letter tags (``["t", 1]`` for the first indeterminate,
``["b", k]`` for the k-th B-basis slot); coefficients are pairs of rational
strings.  Round-trips are bit-exact because every component is an integer
ratio.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import StructureError
from .ncalg import GeneratorSystem, KernelMatrix, NCPoly, TensorPoly
from .scalars import QQi


def _frac_str(f: Fraction) -> str:
    return str(f)


def _frac_parse(s) -> Fraction:
    return Fraction(str(s))


def coeff_to_json(c: QQi):
    return [_frac_str(c.re), _frac_str(c.im)]


def coeff_from_json(data) -> QQi:
    re, im = data
    return QQi(_frac_parse(re), _frac_parse(im))


def word_to_json(word):
    out = []
    for pos, v in enumerate(word):
        if pos % 2 == 1:
            out.append(["t", v + 1])  # letters are 1-based in the text form
        else:
            out.append(["b", v])
    return out


def word_from_json(data, system: GeneratorSystem):
    word = []
    for pos, tag in enumerate(data):
        kind, idx = tag
        if pos % 2 == 1:
            if kind != "t":
                raise StructureError(f"expected a letter tag at position {pos}")
            word.append(int(idx) - 1)
        else:
            if kind != "b":
                raise StructureError(f"expected a B tag at position {pos}")
            word.append(int(idx))
    w = tuple(word)
    system.check_word(w)
    return w


def poly_to_json(p: NCPoly):
    return {
        "n": p.system.n,
        "b_dim": p.system.b.dim,
        "terms": [{"word": word_to_json(w), "coeff": coeff_to_json(c)}
                  for w, c in p.sorted_terms()],
    }


def poly_from_json(data, system: GeneratorSystem) -> NCPoly:
    if data.get("n") != system.n or data.get("b_dim") != system.b.dim:
        raise StructureError("serialized polynomial does not match the generator system")
    terms = {}
    for item in data["terms"]:
        w = word_from_json(item["word"], system)
        c = coeff_from_json(item["coeff"])
        if not c.is_zero:
            terms[w] = terms.get(w, QQi(0)) + c
    return NCPoly(system, terms)


def poly_tuple_to_json(polys):
    return [poly_to_json(p) for p in polys]


def poly_tuple_from_json(data, system) -> tuple:
    return tuple(poly_from_json(d, system) for d in data)


def tensor_to_json(t: TensorPoly):
    return {
        "n": t.system.n,
        "b_dim": t.system.b.dim,
        "terms": [{"left": word_to_json(a), "right": word_to_json(b),
                   "coeff": coeff_to_json(c)}
                  for (a, b), c in t.sorted_terms()],
    }


def tensor_from_json(data, system: GeneratorSystem) -> TensorPoly:
    if data.get("n") != system.n or data.get("b_dim") != system.b.dim:
        raise StructureError("serialized tensor does not match the generator system")
    terms = {}
    for item in data["terms"]:
        a = word_from_json(item["left"], system)
        b = word_from_json(item["right"], system)
        c = coeff_from_json(item["coeff"])
        if not c.is_zero:
            terms[(a, b)] = terms.get((a, b), QQi(0)) + c
    return TensorPoly(system, terms)


def kernel_to_json(k: KernelMatrix):
    return {
        "size": k.size,
        "entries": [[tensor_to_json(e) for e in row] for row in k.entries],
    }


def kernel_from_json(data, system: GeneratorSystem) -> KernelMatrix:
    entries = [[tensor_from_json(e, system) for e in row] for row in data["entries"]]
    k = KernelMatrix(system, entries)
    if k.size != data.get("size"):
        raise StructureError("kernel size field does not match the entries")
    return k
