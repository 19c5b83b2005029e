"""The refactoring pipeline: extraction, preprocessing, the staged loop, DSE and campaigns."""

from .campaign import CampaignResult, CampaignStats, Spread, load_campaign, run_attempt, run_campaign
from .convert import convert, convert_kernel
from .dse import Candidate, DseResult, dse, grid, loop_sites
from .extract import extract_kernel
from .kernel import Check, Kernel, load_bundle, save_bundle
from .preprocess import PreprocessResult, preprocess
from .services import Services, services_from_config
from .transcript import AttemptStore, Fail, Pass, RunTranscript, StageRecord, load_attempt

__all__ = [
    "AttemptStore", "Candidate", "CampaignResult", "CampaignStats", "Check", "DseResult", "Fail", "Kernel",
    "Pass", "PreprocessResult", "RunTranscript", "Services", "Spread", "StageRecord", "convert",
    "convert_kernel", "dse", "extract_kernel", "grid", "load_attempt", "load_bundle", "load_campaign",
    "loop_sites", "preprocess", "run_attempt", "run_campaign", "save_bundle", "services_from_config",
]
