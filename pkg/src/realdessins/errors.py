"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class DessinError(Exception):
    """Base class for domain errors; ``code`` is a stable machine-readable tag."""

    code = "dessin_error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class DessinSyntaxError(DessinError):
    code = "syntax_error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if line is not None else ""
        if column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}" if where else message)

    def to_dict(self) -> dict:
        out = super().to_dict()
        out.update(line=self.line, column=self.column)
        return out


class InvalidDessin(DessinError):
    code = "invalid_dessin"

    def __init__(self, message: str, violations: list[str] | None = None):
        self.violations = list(violations or [])
        super().__init__(message)

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["violations"] = self.violations
        return out


class ColorSumMismatch(DessinError):
    code = "color_sum_mismatch"


class PatternMismatch(DessinError):
    code = "pattern_mismatch"


class ValidityBroken(DessinError):
    code = "validity_broken"


class NotACutSite(DessinError):
    code = "not_a_cut_site"


class ArcMismatch(DessinError):
    code = "arc_mismatch"


class ResultInvalid(InvalidDessin):
    code = "result_invalid"


class NotUninodal(DessinError):
    code = "not_uninodal"


class NotAToile(DessinError):
    code = "not_a_toile"


class PreconditionFailed(DessinError):
    code = "precondition_failed"


class FixtureCorrupt(DessinError):
    code = "fixture_corrupt"


class ClassCountMismatch(DessinError):
    code = "class_count_mismatch"


class Unclassified(DessinError):
    code = "unclassified"


class DegenerateQuadruple(DessinError):
    code = "degenerate_quadruple"


class Indeterminate(DessinError):
    code = "indeterminate"


class NonGenericInput(DessinError):
    code = "non_generic_input"


class NonGenericPoint(NonGenericInput):
    code = "non_generic_point"


class TracingFailure(DessinError):
    code = "tracing_failure"


class UnknownFormat(DessinError):
    code = "unknown_format"
