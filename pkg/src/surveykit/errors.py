"""Exception and warning types shared across the toolkit."""


class SurveyKitError(ValueError):
    """Base class for all toolkit errors."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class SchemaMismatch(SurveyKitError):
    code = "schema_mismatch"


class UnknownCategory(SurveyKitError):
    code = "unknown_category"

    def __init__(self, variable, value, row):
        self.variable, self.value, self.row = variable, value, row
        super().__init__(f"row {row}: value {value!r} is not a declared category of {variable!r}")


class MissingCell(SurveyKitError):
    code = "missing_cell"

    def __init__(self, row, variable):
        self.row, self.variable = row, variable
        super().__init__(f"row {row}: missing value for {variable!r}")


class NegativeWeight(SurveyKitError):
    code = "negative_weight"

    def __init__(self, row):
        self.row = row
        super().__init__(f"row {row}: negative survey weight")


class AllZeroWeights(SurveyKitError):
    code = "all_zero_weights"


class InvalidMarginal(SurveyKitError):
    code = "invalid_marginal"


class BadVariableIndex(SurveyKitError):
    code = "bad_variable_index"


class LengthMismatch(SurveyKitError):
    code = "length_mismatch"


class DimensionMismatch(SurveyKitError):
    code = "dimension_mismatch"


class NotPSD(SurveyKitError):
    code = "not_psd"


class DegenerateData(SurveyKitError):
    code = "degenerate_data"


class NonFiniteLoss(SurveyKitError):
    code = "non_finite_loss"


class Diverged(SurveyKitError):
    code = "diverged"


class AllEqualScores(SurveyKitError):
    code = "all_equal_scores"


class TooFewItems(SurveyKitError):
    code = "too_few_items"


class SingleCluster(SurveyKitError):
    code = "single_cluster"


class InfeasibleDomains(SurveyKitError):
    code = "infeasible_domains"


class BudgetInfeasible(SurveyKitError):
    code = "budget_infeasible"


class OversizedSample(SurveyKitError):
    code = "oversized_sample"


class RetryExhausted(SurveyKitError):
    code = "retry_exhausted"


class InvalidSizeMeasure(SurveyKitError):
    code = "invalid_size_measure"


class EmptyStratumSample(SurveyKitError):
    code = "empty_stratum_sample"


class ZeroInclusionProbability(SurveyKitError):
    code = "zero_inclusion_probability"


class NonConvergence(SurveyKitError):
    code = "non_convergence"


class ConfigError(SurveyKitError):
    code = "config_error"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def to_dict(self):
        out = super().to_dict()
        if self.field is not None:
            out["field"] = self.field
        return out


class DegenerateVariableWarning(UserWarning):
    """Fewer than two observed categories; the entropy score is set to 1."""


class DegenerateMCCWarning(UserWarning):
    """A confusion table had an empty row or column; MCC reported as 0."""


class EmptyDomainSampleWarning(UserWarning):
    """A domain received no sampled units and was dropped from the PML fit."""


class ZeroVarianceWarning(UserWarning):
    """Optimal allocation fell back to proportional because all sigmas were 0."""


class UnreliableMetricWarning(UserWarning):
    """Too few replications or permutations for a meaningful interval."""
