from .clock import SimClock
from .drills import Attack, with_attack
from .net import (adversary_replay, adversary_tamper, AdversaryAction, AdversarySpec,
                  DropMessage, Injection, Network, ReplayMessage, TamperMessage, Transcript,
                  TranscriptEntry)
from .privacy import Leak, merge_readers, scan_bytes, scan_transcript, Sensitive
from .scenario import (classify_reply, load_scenario, outcome_matches, parse_modifier,
                       Report, run_scenario, scenario_schema, StepReport, validate_scenario,
                       World)

__all__ = ['SimClock', 'Attack', 'with_attack', 'adversary_replay', 'adversary_tamper',
           'AdversaryAction', 'AdversarySpec', 'DropMessage', 'Injection', 'Network',
           'ReplayMessage', 'TamperMessage', 'Transcript', 'TranscriptEntry', 'Leak',
           'merge_readers', 'scan_bytes', 'scan_transcript', 'Sensitive', 'classify_reply',
           'load_scenario', 'outcome_matches', 'parse_modifier', 'Report', 'run_scenario',
           'scenario_schema', 'StepReport', 'validate_scenario', 'World']
