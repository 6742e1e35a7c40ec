"""Exception hierarchy shared across the tuner.

Everything user-facing derives from TunerError so the CLI and the HTTP
layer can map failures to exit code 2 / 4xx responses uniformly.
"""


class TunerError(Exception):
    """Base class for all tuner errors."""

    code = "error"


class NTriplesSyntaxError(TunerError):
    code = "ntriples-syntax"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class BlankNodeError(NTriplesSyntaxError):
    code = "blank-node-unsupported"


class UnknownIdError(TunerError):
    code = "unknown-id"

    def __init__(self, term_id: int):
        super().__init__(f"no term with id {term_id}")
        self.term_id = term_id


class SparqlSyntaxError(TunerError):
    code = "sparql-syntax"


class UnsupportedFeatureError(TunerError):
    code = "unsupported-feature"


class EmptyHeadError(SparqlSyntaxError):
    code = "empty-head"


class QueryValidationError(TunerError):
    """Carries one named violation: unsafe-head, disconnected-body, empty-body."""

    def __init__(self, violation: str, message: str):
        super().__init__(message)
        self.code = violation
        self.violation = violation


class SchemaError(TunerError):
    code = "schema-error"


class BranchCapExceededError(TunerError):
    code = "branch-cap-exceeded"

    def __init__(self, required: int, cap: int):
        super().__init__(f"reformulation needs {required} branches, cap is {cap}")
        self.required = required
        self.cap = cap


class EmptyWorkloadError(TunerError):
    code = "empty-workload"


class InvalidSiteError(TunerError):
    code = "invalid-site"


class PropertyCutDisabledError(TunerError):
    code = "property-cut-disabled"


class NotApplicableError(TunerError):
    code = "not-applicable"


class NotIsomorphicError(TunerError):
    code = "not-isomorphic"


class MissingViewError(TunerError):
    code = "missing-view"

    def __init__(self, view_id: str):
        super().__init__(f"view {view_id!r} is not materialized")
        self.view_id = view_id


class UnknownQueryError(TunerError):
    code = "unknown-query"

    def __init__(self, name: str):
        super().__init__(f"no workload query named {name!r}")
        self.name = name


class SessionError(TunerError):
    """Session lifecycle violations (missing-dataset, not-materialized, ...)."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class UnknownJobError(TunerError):
    code = "unknown-job"


class JobInProgressError(TunerError):
    code = "job-in-progress"
