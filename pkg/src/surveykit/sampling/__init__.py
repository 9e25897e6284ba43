"""Synthetic populations, allocation, sample designs and mean estimators."""

from .allocation import AllocationPlan, allocate, optimal_cost, proportional
from .designs import inclusion_targets, sampford_sample, sampford_samples, srs_sample
from .estimators import FrameSample, estimate_pml, estimate_sm, estimate_sts
from .montecarlo import EstimatorRunResult, run_monte_carlo
from .population import PopulationConfig, SyntheticPopulation, build_frames, generate_population, stratify
from .scenario import Scenario, load_scenario, default_scenario
