"""Model-file serialization with a canonical JSON form.

Machines are stored as JSON objects with ``states``, ``alphabet`` and a flat
``transitions`` list; qubit sources add a ``quantum_alphabet`` block mapping
each symbol to either Bloch angles or an explicit ket; measured machines add
a ``provenance`` block.  The writer is canonical (fixed key order, sorted
transitions, floats at 17 significant digits), so loading a file and saving
it again reproduces the bytes exactly.
"""

from __future__ import annotations

import hashlib
import math
from importlib import resources

from .errors import InputError
from .hmc import LabeledHMC
from .measured import CCQS, MeasuredHMC
from .quantum import QubitPureState, qubit_from_bloch

# -- canonical JSON -----------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("non-finite numbers cannot be serialized")
    s = f"{x:.17g}"
    # "-0" would reload as the unsigned integer zero; keep the IEEE sign.
    return "-0.0" if s == "-0" else s


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def canonical_json(obj, indent: int = 0) -> str:
    """Serialize with deterministic layout: dict keys in insertion order,
    floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return _escape(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{_escape(str(k))}: {canonical_json(v, indent + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [canonical_json(v, indent + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(inner + p for p in parts) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def model_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- saving -------------------------------------------------------------


def _quantum_entry(state: QubitPureState) -> dict:
    if state.bloch_angles is not None:
        t, p = state.bloch_angles
        return {"bloch": [float(t), float(p)]}
    return {
        "ket": [
            [float(state.a.real), float(state.a.imag)],
            [float(state.b.real), float(state.b.imag)],
        ]
    }


def dumps_model(obj) -> str:
    """Canonical JSON text for a machine, qubit source, or measured machine."""
    if isinstance(obj, CCQS):
        hmc = obj.hmc
        doc = {"name": obj.name} if obj.name else {}
    else:
        hmc = obj
        doc = {}
    if not isinstance(hmc, LabeledHMC):
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    doc["states"] = list(hmc.states)
    doc["alphabet"] = list(hmc.alphabet)
    transitions = []
    for i, s in enumerate(hmc.states):
        for x in hmc.alphabet:
            row = hmc.matrix(x)[i]
            for j, p in enumerate(row):
                if p > 0.0:
                    transitions.append(
                        {"from": s, "symbol": x, "to": hmc.states[j], "p": float(p)}
                    )
    doc["transitions"] = transitions
    if isinstance(obj, CCQS):
        doc["quantum_alphabet"] = {
            str(sym): _quantum_entry(obj.quantum_alphabet[sym])
            for sym in hmc.alphabet
        }
    if isinstance(obj, MeasuredHMC):
        doc["provenance"] = obj.provenance
    return canonical_json(doc) + "\n"


def save_model(obj, path) -> str:
    text = dumps_model(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


# -- loading ------------------------------------------------------------


def _require(cond: bool, message: str, pointer: str):
    if not cond:
        raise InputError(message, pointer=pointer)


def loads_model(text: str):
    """Parse model JSON; returns a LabeledHMC, MeasuredHMC, or CCQS."""
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}", pointer="") from None
    _require(isinstance(doc, dict), "top level must be an object", "")
    states = doc.get("states")
    _require(isinstance(states, list) and states, "states must be a nonempty list",
             "/states")
    alphabet = doc.get("alphabet")
    _require(isinstance(alphabet, list) and alphabet,
             "alphabet must be a nonempty list", "/alphabet")
    states_t = [tuple(s) if isinstance(s, list) else s for s in states]
    alpha_t = [tuple(a) if isinstance(a, list) else a for a in alphabet]
    _require(len(set(states_t)) == len(states_t), "duplicate states", "/states")
    _require(len(set(alpha_t)) == len(alpha_t), "duplicate symbols", "/alphabet")
    sidx = {s: i for i, s in enumerate(states_t)}
    n = len(states_t)
    transitions = doc.get("transitions")
    _require(isinstance(transitions, list), "transitions must be a list",
             "/transitions")
    mats = {x: [[0.0] * n for _ in range(n)] for x in alpha_t}
    seen = set()
    for k, tr in enumerate(transitions):
        ptr = f"/transitions/{k}"
        _require(isinstance(tr, dict), "transition must be an object", ptr)
        for fieldname in ("from", "symbol", "to", "p"):
            _require(fieldname in tr, f"missing field {fieldname!r}", ptr)
        src = tr["from"]
        sym = tr["symbol"]
        dst = tr["to"]
        _require(src in sidx, f"unknown state {src!r}", ptr + "/from")
        _require(sym in mats, f"unknown symbol {sym!r}", ptr + "/symbol")
        _require(dst in sidx, f"unknown state {dst!r}", ptr + "/to")
        p = tr["p"]
        _require(isinstance(p, (int, float)) and not isinstance(p, bool),
                 "p must be a number", ptr + "/p")
        p = float(p)
        _require(-1e-12 <= p <= 1.0 + 1e-12, "p must lie in [0, 1]", ptr + "/p")
        key = (src, sym, dst)
        _require(key not in seen, f"duplicate transition {key!r}", ptr)
        seen.add(key)
        mats[sym][sidx[src]][sidx[dst]] = p
    provenance = doc.get("provenance")
    qa = doc.get("quantum_alphabet")
    if qa is None:
        if provenance is not None:
            _require(isinstance(provenance, dict), "provenance must be an object",
                     "/provenance")
            return MeasuredHMC(tuple(states_t), tuple(alpha_t), mats, provenance)
        return LabeledHMC(tuple(states_t), tuple(alpha_t), mats)
    _require(isinstance(qa, dict), "quantum_alphabet must be an object",
             "/quantum_alphabet")
    quantum = {}
    for sym in alpha_t:
        key = str(sym)
        _require(key in qa, f"no quantum state for symbol {sym!r}",
                 f"/quantum_alphabet/{key}")
        quantum[sym] = _parse_quantum(qa[key], f"/quantum_alphabet/{key}")
    hmc = LabeledHMC(tuple(states_t), tuple(alpha_t), mats)
    name = doc.get("name", "")
    _require(isinstance(name, str), "name must be a string", "/name")
    return CCQS(hmc, quantum, name=name)


def _parse_quantum(entry, pointer: str) -> QubitPureState:
    _require(isinstance(entry, dict), "quantum state must be an object", pointer)
    if "bloch" in entry:
        angles = entry["bloch"]
        _require(
            isinstance(angles, list) and len(angles) == 2
            and all(isinstance(v, (int, float)) for v in angles),
            "bloch must be [theta, phi]", pointer + "/bloch")
        return qubit_from_bloch(float(angles[0]), float(angles[1]))
    if "ket" in entry:
        ket = entry["ket"]
        _require(
            isinstance(ket, list) and len(ket) == 2
            and all(isinstance(c, list) and len(c) == 2 for c in ket),
            "ket must be [[re, im], [re, im]]", pointer + "/ket")
        try:
            return QubitPureState(
                complex(float(ket[0][0]), float(ket[0][1])),
                complex(float(ket[1][0]), float(ket[1][1])),
            )
        except ValueError as exc:
            raise InputError(str(exc), pointer=pointer + "/ket") from None
    raise InputError("quantum state needs 'bloch' or 'ket'", pointer=pointer)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read())


# -- bundled models -----------------------------------------------------

BUNDLED = (
    "golden_mean_orthogonal",
    "golden_mean_nonorthogonal",
    "nemo_nonorthogonal",
    "random_insertion",
    "state_pair",
)


def bundled_model_path(name: str):
    """Filesystem path of a bundled model (also accepts '<name>.json')."""
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in BUNDLED:
        raise InputError(
            f"unknown bundled model {name!r}; available: {', '.join(BUNDLED)}",
            pointer="",
        )
    return resources.files("qssp").joinpath("models", f"{stem}.json")


def load_bundled(name: str):
    return loads_model(bundled_model_path(name).read_text(encoding="utf-8"))
