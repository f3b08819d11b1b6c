from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from mvmob.model import SourceSpan


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


# Registry of every diagnostic code the toolchain emits.
CODES: dict[str, str] = {
    # syntax
    "PAR001": "unexpected token",
    "PAR002": "invalid character or unterminated string",
    "PAR003": "unterminated block comment",
    "PAR004": "invalid string escape",
    "PAR005": "unknown keyword value (type, kind, gesture, capability, ...)",
    "PAR010": "malformed comparison",
    "PAR030": "correspondence endpoints do not match the correspondence type",
    # naming
    "NAM001": "duplicate navigation element name",
    "NAM002": "duplicate entity name",
    "NAM003": "duplicate entity member name",
    "NAM004": "duplicate UI element name",
    "NAM005": "duplicate UI attribute",
    "NAM006": "duplicate rule name",
    "NAM007": "duplicate action node name",
    "NAM008": "duplicate correspondence name",
    "NAM009": "duplicate operation parameter",
    "NAM010": "no entry view",
    "NAM011": "more than one entry view",
    # intra-model validation
    "VAL100": "flow endpoint is not a declared view",
    "VAL101": "guard path does not resolve against the declared bindings",
    "VAL102": "entry view does not exist",
    "VAL110": "reference target is not a declared entity",
    "VAL111": "member name collides with an implicit CRUD operation",
    "VAL120": "UI containment is not a forest of containers",
    "VAL121": "basic UI element has children",
    "VAL130": "rule body has no entry or a dangling control-flow target",
    "VAL131": "action node unreachable from the rule entry",
    # cross-model validation
    "VAL200": "ViewMainContainer must link a view to a root container",
    "VAL201": "view has more than one main container",
    "VAL202": "view has no main container",
    "VAL203": "container is the main container of several views",
    "VAL210": "AttributeLabel must link an entity property to a label",
    "VAL220": "ActionDataOperation must link a data action to the operation it performs",
    "VAL230": "ElementEntityBinding must link a container to an entity",
    "VAL231": "NavItemFlow must link a navigation item to a flow leaving its view",
    "VAL240": "navigate action names an unknown flow",
    "VAL241": "event target is not an interactive UI element",
    "VAL242": "rule scope is not a declared view",
    "VAL243": "data action names an unknown entity/operation or has bad arguments",
    "VAL244": "UI update names an unknown element",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ValueError(f"unregistered diagnostic code {self.code}")
        object.__setattr__(self, "severity", Severity(self.severity))

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        s = self.span
        return (s.file, s.start_line, s.start_col)

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "message": self.message,
            "file": self.span.file,
            "line": self.span.start_line,
            "col": self.span.start_col,
        }

    def human(self) -> str:
        s = self.span
        return f"{s.file}:{s.start_line}:{s.start_col}: {self.severity.value} {self.code} {self.message}"


def point(file: str, line: int = 0, col: int = 0) -> SourceSpan:
    return SourceSpan(file, line, col, line, col)


def error(code: str, message: str, span: Optional[SourceSpan]) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span or point(""))


def warning(code: str, message: str, span: Optional[SourceSpan]) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span or point(""))


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    # stable: equal positions keep emission order
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)
