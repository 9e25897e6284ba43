"""Reference values used as fixtures and report templates.

``ATYPICAL_MARGINALS`` are rounded category frequencies for the seven atypical
variables of a 1925-respondent household survey. The remaining twelve
variables have no known marginals; ``SYNTHETIC_MARGINALS`` are geometric
profiles chosen so their entropy scores sit on the reference typical scores.
"""
from __future__ import annotations

from .dataset import VariableSpec

N_RESPONDENTS = 1925

# variable name -> (description, kind, {label: frequency})
ATYPICAL_MARGINALS = {
    "CITTADX": ("Italian citizenship", "binary",
                {"Yes": 0.954, "No": 0.047}),
    "NCITT": ("Italian citizen from birth", "nominal",
              {"Yes": 0.9257, "No": 0.0473, "Not applicable": 0.027}),
    "SECITT": ("Secondary citizenship (if applicable)", "nominal",
               {"Yes": 0.0171, "No": 0.9829, "Not applicable": 0.0}),
    "ITA": ("Continuous residence in Italy", "nominal",
            {"Yes": 0.9361, "No": 0.0639, "Not applicable": 0.0}),
    "VIFAM": ("Lived within the household for the whole 2019", "nominal",
              {"Yes": 0.992, "No, only for a period": 0.008, "No": 0.0}),
    "TIPSCU": ("Type of school attended (if applicable)", "nominal",
               {"Kindergarten": 0.019, "Nursery": 0.024, "Primary school": 0.036,
                "Lower secondary school": 0.017, "Upper secondary school": 0.004,
                "No schooling": 0.007, "Not applicable": 0.893}),
    "SEV_MAT_DEPRIV": ("Severity of material deprivation", "nominal",
                       {"Yes": 0.0301, "No": 0.0, "Not applicable": 0.9699}),
}

SYNTHETIC_MARGINALS = {
    "ETAINT": ("Respondent's age", "ordinal",
               {"32-64": 0.5692, "65+": 0.2865, "16-32": 0.1443}),
    "LAVPRI": ("Employment status", "nominal",
               {"Employed": 0.3567, "Retired": 0.2367, "Homemaker": 0.157,
                "Student": 0.1042, "Self-employed": 0.0691, "Unemployed": 0.0459,
                "Other inactive": 0.0304}),
    "FONTERED": ("Source of income or funding", "nominal",
                 {"Employee income": 0.5669, "Pensions": 0.251, "Self-employment": 0.1111,
                  "Transfers": 0.0492, "Other": 0.0218}),
    "TOT_TUTTI": ("Number of individuals in the household", "ordinal",
                  {"2": 0.5062, "3": 0.2589, "1": 0.1325, "4": 0.0678, "5+": 0.0346}),
    "RAGA017": ("Number of minor children within the household", "ordinal",
                {"0": 0.7416, "1": 0.1942, "2": 0.0509, "3+": 0.0133}),
    "DON1555": ("Number of women aged 15-55", "ordinal",
                {"0": 0.7059, "1": 0.2116, "2": 0.0634, "3+": 0.0191}),
    "STACIV": ("Civil status", "nominal",
               {"Married": 0.552, "Single": 0.2535, "Widowed": 0.1164,
                "Divorced": 0.0535, "Separated": 0.0246}),
    "TF": ("Type of family", "nominal",
           {"Couple with children": 0.4114, "Couple without children": 0.2588,
            "Single person": 0.1629, "Single parent": 0.1025, "Other": 0.0644}),
    "RISKPOV": ("Risk of poverty indicator", "binary", {"No": 0.8894, "Yes": 0.1106}),
    "LOW_WORK_INT": ("Indicator of low work intensity", "nominal",
                     {"No": 0.6646, "Not applicable": 0.245, "Yes": 0.0904}),
    "POV_SOC_EXCL": ("Social exclusion due to poverty", "binary",
                     {"No": 0.8442, "Yes": 0.1558}),
    "QUINTI_EU": ("Quintile in the European Union economic ranking", "ordinal",
                  {"Q3": 0.2912, "Q2": 0.2361, "Q4": 0.1915, "Q1": 0.1553, "Q5": 0.1259}),
}

VARIABLE_ORDER = (
    "ETAINT", "CITTADX", "NCITT", "SECITT", "ITA", "VIFAM", "LAVPRI", "FONTERED",
    "TOT_TUTTI", "RAGA017", "DON1555", "STACIV", "TF", "TIPSCU", "SEV_MAT_DEPRIV",
    "RISKPOV", "LOW_WORK_INT", "POV_SOC_EXCL", "QUINTI_EU",
)

# variable -> (reference entropy score, reference cluster label)
REFERENCE_ENTROPY_SCORES = {
    "VIFAM": (0.951527, "Atypical"),
    "SECITT": (0.874917, "Atypical"),
    "SEV_MAT_DEPRIV": (0.804957, "Atypical"),
    "TIPSCU": (0.737139, "Atypical"),
    "CITTADX": (0.725303, "Atypical"),
    "NCITT": (0.714841, "Atypical"),
    "ITA": (0.657279, "Atypical"),
    "RISKPOV": (0.498129, "Typical"),
    "RAGA017": (0.459679, "Typical"),
    "DON1555": (0.405058, "Typical"),
    "POV_SOC_EXCL": (0.375726, "Typical"),
    "FONTERED": (0.288991, "Typical"),
    "STACIV": (0.270583, "Typical"),
    "LOW_WORK_INT": (0.241451, "Typical"),
    "TOT_TUTTI": (0.216393, "Typical"),
    "LAVPRI": (0.143095, "Typical"),
    "ETAINT": (0.127812, "Typical"),
    "TF": (0.117092, "Typical"),
    "QUINTI_EU": (0.026564, "Typical"),
}

# simulation study: stratum/frame allocation and MC mean squared errors
REFERENCE_ALLOCATION = {
    ("STS", "proportional"): (198, 198, 204),
    ("STS", "optimal_cost"): (213, 171, 217),
    ("MF", "proportional"): (198, 198, 204),
    ("MF", "optimal_cost"): (156, 246, 198),
}

# (allocation, estimator) -> (MSE, P5, P95)
REFERENCE_MSE = {
    ("optimal_cost", "PML"): (26.5e-6, 23.3e-6, 29.8e-6),
    ("optimal_cost", "SM"): (27.1e-6, 23.8e-6, 30.4e-6),
    ("optimal_cost", "STS"): (24.9e-6, 21.6e-6, 28.2e-6),
    ("proportional", "PML"): (26.7e-6, 23.4e-6, 30.1e-6),
    ("proportional", "SM"): (27.5e-6, 24.1e-6, 30.6e-6),
    ("proportional", "STS"): (26.2e-6, 22.9e-6, 27.5e-6),
}


def _entry(name):
    if name in ATYPICAL_MARGINALS:
        return ATYPICAL_MARGINALS[name]
    return SYNTHETIC_MARGINALS[name]


def description(name: str) -> str:
    return _entry(name)[0]


def survey_marginals(names=VARIABLE_ORDER) -> list[tuple[VariableSpec, list[float]]]:
    """(spec, frequencies) pairs for generate_fixture, in the given order."""
    out = []
    for name in names:
        _, kind, freq = _entry(name)
        out.append((VariableSpec(name, list(freq), kind), list(freq.values())))
    return out
