class InvalidPredictionError(ValueError):
    """
    A decoded box with nonpositive or non-finite width or height.
    """


class CheckpointError(ValueError):
    """
    A checkpoint that cannot be loaded: corrupt, wrong format or version,
    or parameters whose shapes disagree with the receiving model.
    """


class NonFiniteError(RuntimeError):
    """
    A loss or optimizer step produced NaN or infinity.
    """
