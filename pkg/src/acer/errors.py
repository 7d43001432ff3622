class AcerError(Exception):
    """Base class for all errors raised by this package."""

    code = "ACER_ERROR"


class CorpusError(AcerError):
    code = "CORPUS_ERROR"


class IndexBuildError(AcerError):
    code = "INDEX_ERROR"


class EmptyQueryError(AcerError):
    code = "EMPTY_QUERY"


class DatasetError(AcerError):
    code = "DATASET_ERROR"


class ModelError(AcerError):
    code = "MODEL_ERROR"


class ReportError(AcerError):
    code = "REPORT_ERROR"
