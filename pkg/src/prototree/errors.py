"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when input data fails a structural or numeric check.

    The message always names the first offending entry (cell, row, or
    field) so that operators can locate the problem in their files.
    """


class DigestMismatchError(ValidationError):
    """A session or tree file refers to a different dendrogram."""


class IncompleteLabelSetError(ValidationError):
    """A label set is missing entries for one or more dendrogram leaves."""

    def __init__(self, label_set_id: str, missing: list[str]):
        self.label_set_id = label_set_id
        self.missing = sorted(missing)
        preview = ", ".join(self.missing[:10])
        if len(self.missing) > 10:
            preview += ", ..."
        super().__init__(
            f"label set {label_set_id!r} is missing entries for "
            f"{len(self.missing)} leaves: [{preview}]"
        )
