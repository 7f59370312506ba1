"""
Seeded property campaigns over random programs and THAD sets.

Three properties are checked:
  - oracle equivalence: on loop-free programs the static verdicts equal
    the brute-force path oracle for every THAD;
  - loop soundness: on one-loop programs a Satisfied verdict is never
    contradicted by the oracle at unroll factors 1, 2 and 3;
  - annotation correctness: along every path, interpreting the planned
    ghost code fails an assert of a THAD iff the path violates it.

Each campaign returns one row per program as a pandas DataFrame.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from annotator.interpreter import interpret_plan
from annotator.plan import UpdatePolicy, plan_annotations
from checker.oracle import brute_force_paths, enumerate_walks, path_events
from checker.verdicts import VerdictStatus, check
from config import (
    LOOP_BRANCHES,
    LOOP_FREE_PROGRAMS,
    MAX_BRANCHES,
    ONE_LOOP_PROGRAMS,
    RANDOM_STATE,
    UNROLL_FACTORS,
)
from frontend.pipeline import analyze_source
from generators.random_programs import random_program, random_thad_set
from model.semantics import trace_satisfies
from model.thad import ThadSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CampaignCase:
    index: int
    source: str
    thad_set: ThadSet


def generate_cases(
    count: int,
    constants: Dict[str, int],
    seed: int = RANDOM_STATE,
    loop: bool = False,
    descriptors: Optional[int] = None,
    extra_opens: bool = True,
    max_branches: int = MAX_BRANCHES,
) -> List[CampaignCase]:
    """
    Draw ``count`` (program, THAD set) pairs from one seeded generator.

    Args:
        count: Number of cases.
        constants: Constants table shared by programs and THAD sets.
        seed: Generator seed.
        loop: Give every program exactly one loop.
        descriptors: 1 or 2; drawn per program when None.
        extra_opens: Allow bare `open` calls in programs.
        max_branches: Upper bound on `if` statements per program.

    Returns:
        The cases in generation order.
    """
    rng = np.random.default_rng(seed)
    cases: List[CampaignCase] = []
    for index in range(count):
        fds = descriptors if descriptors is not None else int(rng.integers(1, 3))
        source = random_program(
            rng,
            constants,
            max_branches=max_branches,
            loop=loop,
            descriptors=fds,
            extra_opens=extra_opens,
        )
        cases.append(CampaignCase(index, source, random_thad_set(rng, constants)))
    return cases


def oracle_equivalence(cases: Sequence[CampaignCase]) -> pd.DataFrame:
    """Static verdicts against the exact oracle on loop-free programs."""
    rows = []
    for case in cases:
        program = analyze_source(case.source, case.thad_set, f"random-{case.index}.c")
        static = {
            v.thad_id: v.status is VerdictStatus.SATISFIED for v in check(program, case.thad_set)
        }
        exact = brute_force_paths(program, case.thad_set)
        disagreements = sorted(i for i in static if static[i] != exact[i])
        rows.append(
            {
                "program": case.index,
                "thads": len(static),
                "disagreements": ",".join(disagreements),
                "agrees": not disagreements,
            }
        )
    return pd.DataFrame(rows, columns=["program", "thads", "disagreements", "agrees"])


def loop_soundness(
    cases: Sequence[CampaignCase], unroll_factors: Sequence[int] = UNROLL_FACTORS
) -> pd.DataFrame:
    """Satisfied verdicts on one-loop programs against the unrolled oracle."""
    rows = []
    for case in cases:
        program = analyze_source(case.source, case.thad_set, f"random-{case.index}.c")
        satisfied = [
            v.thad_id for v in check(program, case.thad_set) if v.status is VerdictStatus.SATISFIED
        ]
        contradicted = set()
        for factor in unroll_factors:
            exact = brute_force_paths(program, case.thad_set, path_bound=factor)
            contradicted.update(i for i in satisfied if not exact[i])
        rows.append(
            {
                "program": case.index,
                "satisfied": len(satisfied),
                "contradicted": ",".join(sorted(contradicted)),
                "sound": not contradicted,
            }
        )
    return pd.DataFrame(rows, columns=["program", "satisfied", "contradicted", "sound"])


def annotation_agreement(
    cases: Sequence[CampaignCase], policy: UpdatePolicy = UpdatePolicy.GUARDED
) -> pd.DataFrame:
    """
    Ghost-code interpretation against the trace semantics, path by path.

    The ghost plan keeps one descriptor per bound THAD, so the cases should
    open a single descriptor once.
    """
    rows = []
    for case in cases:
        program = analyze_source(case.source, case.thad_set, f"random-{case.index}.c")
        plan = plan_annotations(case.thad_set, policy)
        thads = case.thad_set.sorted_thads()
        paths = 0
        mismatched = set()
        for walk in enumerate_walks(program.model.entry_cfg):
            paths += 1
            events = path_events(program, walk)
            failed = interpret_plan(plan, events)
            for thad in thads:
                violated = not trace_satisfies(thad, events, case.thad_set.aliases)
                if violated != (thad.id in failed):
                    mismatched.add(thad.id)
        rows.append(
            {
                "program": case.index,
                "paths": paths,
                "mismatched": ",".join(sorted(mismatched)),
                "agrees": not mismatched,
            }
        )
    return pd.DataFrame(rows, columns=["program", "paths", "mismatched", "agrees"])


def run_campaigns(
    constants: Dict[str, int],
    seed: int = RANDOM_STATE,
    loop_free: int = LOOP_FREE_PROGRAMS,
    one_loop: int = ONE_LOOP_PROGRAMS,
) -> Dict[str, pd.DataFrame]:
    """All three campaigns, keyed `oracle`, `loops` and `annotation`."""
    logger.debug("campaigns: %d loop-free, %d one-loop programs, seed %d", loop_free, one_loop, seed)
    return {
        "oracle": oracle_equivalence(generate_cases(loop_free, constants, seed)),
        "loops": loop_soundness(
            generate_cases(one_loop, constants, seed + 1, loop=True, max_branches=LOOP_BRANCHES)
        ),
        "annotation": annotation_agreement(
            generate_cases(loop_free, constants, seed + 2, descriptors=1, extra_opens=False)
        ),
    }
