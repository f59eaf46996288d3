"""Document schema, loader, and canonical serializer.

Documents are UTF-8 JSON files, one document per file, carrying a
``"schema": 1`` version field, a ``"kind"`` discriminator, and a unique
``"name"``.  References between documents are by name.  Serialization is
canonical (sorted keys, two-space indent, trailing newline), so loading
and re-serializing a document set is byte-idempotent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ParseError,
    SemanticError,
    UnresolvedReference,
    WorkbenchError,
)
from .fincat import FinCategory, Presheaf, presheaf, validate_category
from .limits import Diagram, diagram
from .logic import Formula, LogicModel, logic_model, parse_formula
from .classifier import subobject
from .site import (
    FiniteSpace,
    Site,
    finite_space,
    open_cover_topology,
    presheaf_site,
    saturate_topology,
)
from .torsor import Cocycle, GroupSheaf, TorsorCandidate, cocycle, group_sheaf, torsor_candidate

KINDS = (
    "category",
    "space",
    "topology",
    "presheaf",
    "group-sheaf",
    "action",
    "cocycle",
    "formula",
    "diagram",
)

SCHEMA_VERSION = 1


def serialize_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def document_digest(doc: dict) -> str:
    return hashlib.sha256(serialize_document(doc).encode("utf-8")).hexdigest()


def _check_header(doc: dict, where: str) -> None:
    if not isinstance(doc, dict):
        raise SemanticError(f"{where}: document must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SemanticError(f"{where}: unsupported schema version {doc.get('schema')!r}")
    if doc.get("kind") not in KINDS:
        raise SemanticError(f"{where}: unknown kind {doc.get('kind')!r}")
    if not isinstance(doc.get("name"), str) or not doc["name"]:
        raise SemanticError(f"{where}: missing document name")


@dataclass
class FormulaDocument:
    model: LogicModel
    formula: Formula
    context: tuple[tuple[str, str], ...]


@dataclass
class DocumentSet:
    """A resolved collection of documents with lazily built objects."""

    raw: dict[str, dict] = field(default_factory=dict)
    origin: dict[str, str] = field(default_factory=dict)
    _built: dict = field(default_factory=dict)

    def add(self, doc: dict, where: str, allow_shadow: bool = False) -> None:
        _check_header(doc, where)
        name = doc["name"]
        if name in self.raw and not allow_shadow:
            raise SemanticError(
                f"{where}: duplicate document name {name!r} (also in {self.origin[name]})"
            )
        self.raw[name] = doc
        self.origin[name] = where

    def _doc(self, name: str, kinds: tuple[str, ...]) -> dict:
        if name not in self.raw:
            raise UnresolvedReference(f"no document named {name!r}")
        doc = self.raw[name]
        if doc["kind"] not in kinds:
            raise UnresolvedReference(
                f"{name!r} is a {doc['kind']} document; expected one of {kinds}"
            )
        return doc

    def names(self, kind: str | None = None):
        return tuple(
            sorted(n for n, d in self.raw.items() if kind is None or d["kind"] == kind)
        )

    def digest(self, name: str) -> str:
        return document_digest(self._doc(name, KINDS))

    # -- builders ------------------------------------------------------------

    def _memo(self, key, build):
        if key not in self._built:
            try:
                self._built[key] = build()
            except (UnresolvedReference, SemanticError):
                raise
            except WorkbenchError as err:
                raise SemanticError(f"{self.origin.get(key[1], '?')}: {key[1]}: {err}") from err
        return self._built[key]

    def category(self, name: str) -> FinCategory:
        doc = self._doc(name, ("category",))

        def build():
            return validate_category(
                doc["objects"],
                [(m["name"], m["src"], m["tgt"]) for m in doc["morphisms"]],
                doc["identities"],
                {(g, f): gf for g, f, gf in doc.get("compose", [])},
            )

        return self._memo(("category", name), build)

    def space(self, name: str) -> FiniteSpace:
        doc = self._doc(name, ("space",))
        return self._memo(
            ("space", name),
            lambda: finite_space(doc["points"], [tuple(o) for o in doc["opens"]]),
        )

    def site(self, name: str) -> Site:
        doc = self._doc(name, ("space", "topology"))

        def build():
            if doc["kind"] == "space":
                return open_cover_topology(self.space(name))
            cat = self.category(doc["category"])
            covers = doc.get("covers", "trivial")
            if covers == "trivial":
                return presheaf_site(cat)
            families = {u: [tuple(fam) for fam in fams] for u, fams in covers.items()}
            return Site(cat, saturate_topology(cat, families))

        return self._memo(("site", name), build)

    def base_category(self, name: str) -> FinCategory:
        """The category behind a base reference: a category, space, or topology doc."""
        doc = self._doc(name, ("category", "space", "topology"))
        if doc["kind"] == "category":
            return self.category(name)
        return self.site(name).category

    def presheaf(self, name: str) -> Presheaf:
        doc = self._doc(name, ("presheaf",))

        def build():
            base = self.base_category(doc["base"])
            return presheaf(
                base,
                {u: tuple(v) for u, v in doc["values"].items()},
                {f: dict(tab) for f, tab in doc.get("restrictions", {}).items()},
            )

        return self._memo(("presheaf", name), build)

    def group_sheaf(self, name: str) -> GroupSheaf:
        doc = self._doc(name, ("group-sheaf",))

        def build():
            G = self.presheaf(doc["presheaf"])
            mult = {
                u: {(a, b): ab for a, b, ab in triples}
                for u, triples in doc["mult"].items()
            }
            return group_sheaf(G, mult, doc.get("unit"), None)

        return self._memo(("group-sheaf", name), build)

    def action(self, name: str) -> TorsorCandidate:
        doc = self._doc(name, ("action",))

        def build():
            P = self.presheaf(doc["space-presheaf"])
            G = self.group_sheaf(doc["group"])
            action = {
                u: {(p, g): pg for p, g, pg in triples}
                for u, triples in doc["action"].items()
            }
            return torsor_candidate(P, G, action)

        return self._memo(("action", name), build)

    def cocycle(self, name: str) -> Cocycle:
        doc = self._doc(name, ("cocycle",))

        def build():
            site = self.site(doc["site"])
            G = self.group_sheaf(doc["group"])
            values = {(int(i), int(j)): g for i, j, g in doc["values"]}
            return cocycle(site, G, doc["target"], tuple(doc["cover"]), values)

        return self._memo(("cocycle", name), build)

    def formula(self, name: str) -> FormulaDocument:
        doc = self._doc(name, ("formula",))

        def build():
            site = self.site(doc["site"])
            sorts = {alias: self.presheaf(ref) for alias, ref in doc.get("sorts", {}).items()}
            predicates = {}
            for pname, spec in doc.get("predicates", {}).items():
                sort_name = spec["sort"]
                if sort_name not in sorts:
                    raise UnresolvedReference(
                        f"predicate {pname!r} names unknown sort {sort_name!r}"
                    )
                amb = sorts[sort_name]
                parts = {u: frozenset(v) for u, v in spec.get("parts", {}).items()}
                predicates[pname] = (sort_name, subobject(amb, parts))
            model = logic_model(site, sorts, predicates)
            phi = parse_formula(doc["text"])
            context = tuple((v, s) for v, s in doc.get("context", []))
            from .logic import check_sorting

            check_sorting(model, phi, context)
            return FormulaDocument(model, phi, context)

        return self._memo(("formula", name), build)

    def diagram(self, name: str) -> Diagram:
        doc = self._doc(name, ("diagram",))

        def build():
            shape = self.base_category(doc["shape"])
            return diagram(
                shape,
                {u: tuple(v) for u, v in doc["values"].items()},
                {f: dict(tab) for f, tab in doc.get("actions", {}).items()},
            )

        return self._memo(("diagram", name), build)


def load_documents(paths, include_gallery: bool = True) -> DocumentSet:
    """Load JSON documents from files and directories.

    Bundled gallery fixtures are available by name unless shadowed by a
    user document of the same name.
    """
    ds = DocumentSet()
    if include_gallery:
        for name, doc in gallery_documents().items():
            ds.add(doc, f"gallery:{name}")
    files: list[Path] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files.extend(sorted(path.glob("*.json")))
        elif path.exists():
            files.append(path)
        else:
            raise ParseError(f"{path}: no such file or directory")
    for path in files:
        text = path.read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ParseError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from err
        ds.add(doc, str(path), allow_shadow=include_gallery)
    return ds


_GALLERY_CACHE: dict[str, dict] | None = None


def gallery_documents() -> dict[str, dict]:
    global _GALLERY_CACHE
    if _GALLERY_CACHE is None:
        from importlib import resources

        docs = {}
        root = resources.files("sheafkit") / "fixtures"
        for entry in sorted(root.iterdir(), key=lambda e: e.name):
            if entry.name.endswith(".json"):
                doc = json.loads(entry.read_text(encoding="utf-8"))
                docs[doc["name"]] = doc
        _GALLERY_CACHE = docs
    return dict(_GALLERY_CACHE)
